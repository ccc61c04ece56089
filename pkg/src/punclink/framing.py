"""Frame assembly: attached sync marker handling.

The ASM is a known bit pattern prepended to the punctured payload. It is
never punctured (patterns live on the codeword domain, the ASM is attached
afterwards) and the receiver may treat it as perfectly known by injecting
saturated LLRs at its positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .llr import perfect_llrs

DEFAULT_ASM_HEX = "034776C7272895B0"
DEFAULT_ASM_BITS = 64


def asm_bits_from_hex(asm_hex: str, n_bits: int) -> np.ndarray:
    """MSB-first bits of a hex pattern; hex width must match n_bits."""
    if n_bits == 0:
        if asm_hex:
            raise ValueError("asm_hex must be empty when asm length is 0")
        return np.zeros(0, dtype=np.uint8)
    if len(asm_hex) * 4 != n_bits:
        raise ValueError(
            f"asm hex {asm_hex!r} encodes {len(asm_hex) * 4} bits, expected {n_bits}"
        )
    value = int(asm_hex, 16)
    return np.array(
        [(value >> (n_bits - 1 - i)) & 1 for i in range(n_bits)], dtype=np.uint8
    )


@dataclass(frozen=True)
class FrameConfig:
    asm_hex: str = DEFAULT_ASM_HEX
    asm_len: int = DEFAULT_ASM_BITS
    asm_bits: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "asm_bits", asm_bits_from_hex(self.asm_hex, self.asm_len)
        )


def attach_asm(payload: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    payload = np.asarray(payload)
    asm = cfg.asm_bits.astype(payload.dtype)
    return np.concatenate([asm, payload])


def split_frame(llrs: np.ndarray, cfg: FrameConfig):
    """Split frame-domain LLRs into (asm_llrs, payload_llrs)."""
    llrs = np.asarray(llrs)
    if llrs.shape[-1] < cfg.asm_len:
        raise ValueError("frame shorter than the ASM")
    return llrs[..., : cfg.asm_len], llrs[..., cfg.asm_len:]


def asm_priors(cfg: FrameConfig) -> np.ndarray:
    """Saturated LLRs for the known marker bits."""
    return perfect_llrs(cfg.asm_bits)
