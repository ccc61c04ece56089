"""AWGN channel and SNR bookkeeping.

noise_var is always the variance per real dimension: a real signal gets
N(0, noise_var) added, a complex signal gets independent N(0, noise_var)
on each of I and Q. With unit-energy symbols carrying effective_rate
information bits each, Eb/N0 in dB maps to

    noise_var = energy_per_symbol / (2 * effective_rate * 10**(ebn0_db/10))

which for rate-1 BPSK at 0 dB gives the familiar 0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .llr import clamp


@dataclass(frozen=True)
class SnrPoint:
    ebn0_db: float
    esn0_db: float
    effective_rate: float

    @classmethod
    def from_ebn0(cls, ebn0_db: float, effective_rate: float) -> "SnrPoint":
        if effective_rate <= 0:
            raise ValueError("effective rate must be positive")
        return cls(
            ebn0_db=ebn0_db,
            esn0_db=ebn0_db + 10.0 * math.log10(effective_rate),
            effective_rate=effective_rate,
        )

    @classmethod
    def from_esn0(cls, esn0_db: float, effective_rate: float) -> "SnrPoint":
        if effective_rate <= 0:
            raise ValueError("effective rate must be positive")
        return cls(
            ebn0_db=esn0_db - 10.0 * math.log10(effective_rate),
            esn0_db=esn0_db,
            effective_rate=effective_rate,
        )


def ebn0_to_noise_var(
    ebn0_db: float, effective_rate: float, energy_per_symbol: float = 1.0
) -> float:
    if effective_rate <= 0:
        raise ValueError("effective rate must be positive")
    if energy_per_symbol <= 0:
        raise ValueError("symbol energy must be positive")
    return energy_per_symbol / (2.0 * effective_rate * 10.0 ** (ebn0_db / 10.0))


def add_awgn(x: np.ndarray, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """AWGN with variance noise_var per real dimension; 0 is a no-op copy."""
    if noise_var < 0:
        raise ValueError("noise variance must be >= 0")
    x = np.asarray(x)
    if noise_var == 0:
        return x.copy()
    sigma = math.sqrt(noise_var)
    if np.iscomplexobj(x):
        noise = rng.normal(0.0, sigma, size=x.shape + (2,))
        return x + noise[..., 0] + 1j * noise[..., 1]
    return x + rng.normal(0.0, sigma, size=x.shape)


def bpsk_modulate(bits: np.ndarray) -> np.ndarray:
    """bit 0 -> +1.0, bit 1 -> -1.0"""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def bpsk_llr(rx: np.ndarray, noise_var: float) -> np.ndarray:
    """Channel LLRs 2*rx/noise_var, clamped; positive favors bit 0."""
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    return clamp(2.0 * np.asarray(rx, dtype=np.float64) / noise_var)


def bpsk_theory_ber(ebn0_db: float) -> float:
    """Uncoded antipodal signaling: Q(sqrt(2 Eb/N0))."""
    return 0.5 * math.erfc(math.sqrt(10.0 ** (ebn0_db / 10.0)))
