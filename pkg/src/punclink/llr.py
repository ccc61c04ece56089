"""Log-likelihood ratio conventions shared across the receiver.

Positive LLR means bit 0, negative means bit 1, and an exact zero is an
erasure. Magnitudes are clamped to LLR_MAX wherever a message or output
is produced; perfect knowledge of a bit is represented as +/-LLR_MAX.
"""

from __future__ import annotations

import numpy as np

LLR_MAX = 50.0


def clamp(llrs: np.ndarray) -> np.ndarray:
    return np.clip(llrs, -LLR_MAX, LLR_MAX)


def hard_decisions(llrs: np.ndarray) -> np.ndarray:
    """0/1 decisions from LLR signs; exact zeros tie-break to bit 0."""
    return (np.asarray(llrs) < 0).astype(np.uint8)


def perfect_llrs(bits: np.ndarray) -> np.ndarray:
    """Saturated LLRs encoding known bits."""
    return LLR_MAX * (1.0 - 2.0 * np.asarray(bits, dtype=np.float64))
