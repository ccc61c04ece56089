"""Interleaving, random puncturing, and rate-compatibility arithmetic.

Puncturing removes n_punctured positions from the interleaved codeword
before transmission; the receiver reinserts exact-zero LLRs (erasures) at
the removed positions. Rates are exact rationals throughout: puncturing a
rate R code by delta percent yields R_p = R / (1 - delta/100).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .rng import TAG_INTERLEAVER, TAG_PATTERN, stream


def as_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, str, or float.

    Floats go through their shortest decimal repr, so delta = 16.7 means
    exactly 167/1000, not the nearest binary double.
    """
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class InterleaverPermutation:
    n: int
    forward: np.ndarray
    inverse: np.ndarray


def make_permutation(seed, n: int) -> InterleaverPermutation:
    """Fisher-Yates permutation from the named generator (or a given one)."""
    rng = seed if isinstance(seed, np.random.Generator) else stream(
        int(seed), TAG_INTERLEAVER
    )
    forward = rng.permutation(n).astype(np.int64)
    inverse = np.argsort(forward)
    return InterleaverPermutation(n=n, forward=forward, inverse=inverse)


def interleave(v: np.ndarray, perm: InterleaverPermutation) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != perm.n:
        raise ValueError(f"length {v.shape[-1]} does not match permutation {perm.n}")
    out = np.empty_like(v)
    out[..., perm.forward] = v
    return out


def deinterleave(v: np.ndarray, perm: InterleaverPermutation) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != perm.n:
        raise ValueError(f"length {v.shape[-1]} does not match permutation {perm.n}")
    return v[..., perm.forward]


@dataclass(frozen=True)
class PuncturePattern:
    n: int
    indices: np.ndarray  # sorted punctured positions
    keep_mask: np.ndarray

    @property
    def n_punctured(self) -> int:
        return len(self.indices)


def _pattern_from_indices(n: int, idx: np.ndarray) -> PuncturePattern:
    keep = np.ones(n, dtype=bool)
    keep[idx] = False
    return PuncturePattern(n=n, indices=idx, keep_mask=keep)


def sample_pattern(seed, n: int, n_punctured: int) -> PuncturePattern:
    """Uniform random pattern via partial Fisher-Yates.

    Reproducible from (seed, n, n_punctured) when seed is an integer; a
    Generator may be passed instead for per-codeword resampling.
    """
    if not 0 <= n_punctured <= n:
        raise ValueError("n_punctured out of range")
    rng = seed if isinstance(seed, np.random.Generator) else stream(
        int(seed), TAG_PATTERN, point=n_punctured
    )
    arr = np.arange(n)
    for i in range(n_punctured):
        j = i + int(rng.integers(0, n - i))
        arr[i], arr[j] = arr[j], arr[i]
    idx = np.sort(arr[:n_punctured])
    return _pattern_from_indices(n, idx)


def puncture(v: np.ndarray, pattern: PuncturePattern) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != pattern.n:
        raise ValueError("length does not match pattern")
    return v[..., pattern.keep_mask]


def depuncture(llrs: np.ndarray, pattern: PuncturePattern) -> np.ndarray:
    """Reinsert erasures: punctured positions come back as exact 0.0 LLRs."""
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape[-1] != pattern.n - pattern.n_punctured:
        raise ValueError("length does not match pattern survivors")
    out = np.zeros(llrs.shape[:-1] + (pattern.n,), dtype=np.float64)
    out[..., pattern.keep_mask] = llrs
    return out


def punctured_rate(rate, delta_pct) -> Fraction:
    """R_p = R / (1 - delta/100), exact; errors if the result exceeds 1."""
    r = as_fraction(rate)
    d = as_fraction(delta_pct)
    if d < 0:
        raise ValueError("puncturing percentage must be >= 0")
    if d >= 100:
        raise ValueError("puncturing percentage must be < 100")
    rp = r / (1 - d / 100)
    if rp > 1:
        raise ValueError(f"delta {d}% drives the rate above 1 ({rp})")
    return rp


def required_overhead(rate_native, rate_target) -> Fraction:
    """Percentage delta = (1 - R/R_p) * 100 needed to reach rate_target."""
    r = as_fraction(rate_native)
    rp = as_fraction(rate_target)
    if rp < r:
        raise ValueError("target rate below native rate")
    if rp > 1:
        raise ValueError("target rate above 1")
    return (1 - r / rp) * 100


def n_punctured(delta_pct, n: int) -> int:
    """round(delta/100 * n) with exact ties-to-even."""
    d = as_fraction(delta_pct)
    if not 0 <= d < 100:
        raise ValueError("puncturing percentage out of range")
    return round(d / 100 * n)


@dataclass(frozen=True)
class RatePair:
    native: Fraction
    delta_pct: Fraction
    punctured: Fraction

    def __post_init__(self):
        if self.punctured * (1 - self.delta_pct / 100) != self.native:
            raise ValueError("inconsistent rate pair")

    @classmethod
    def from_delta(cls, native, delta_pct) -> "RatePair":
        r = as_fraction(native)
        d = as_fraction(delta_pct)
        return cls(native=r, delta_pct=d, punctured=punctured_rate(r, d))
