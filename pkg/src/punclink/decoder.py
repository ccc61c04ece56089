"""Belief-propagation decoding (flooding schedule).

Check updates use the pairwise-stable boxplus

    bp(a, b) = sign(a) sign(b) min(|a|, |b|)
             + log1p(exp(-|a + b|)) - log1p(exp(-|a - b|))

applied as a leave-one-out prefix/suffix scan along each row, which is the
sum-product rule written without tanh saturation. Dropping the correction
terms gives min-sum; normalized min-sum scales the result by alpha.

Exact-zero inputs are erasures and are first-class: they stay at zero until
parity information arrives. A decode only counts as converged when the
interim hard decisions satisfy every check AND no posterior is exactly
zero, so a fully erased input never "converges" to the tie-broken all-zero
word.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import LdpcCode, ParityCheckMatrix
from .llr import LLR_MAX, clamp, hard_decisions

_IDENT = 1e300  # boxplus identity used for row padding

VARIANTS = ("sum-product", "min-sum", "normalized-min-sum")


@dataclass
class DecodeResult:
    posterior: np.ndarray
    extrinsic: np.ndarray
    hard_bits: np.ndarray
    converged: bool
    iterations_used: int


class _Workspace:
    """Padded edge layout for vectorized flooding on one parity-check matrix."""

    def __init__(self, h: ParityCheckMatrix):
        m, n = h.n_rows, h.n_cols
        wr = int(h.row_weights.max())
        wc = int(h.col_weights.max())
        self.m, self.n, self.wr = m, n, wr
        # row-major edge grid: entry (r, t) is the t-th column of row r
        self.row_cols = np.full((m, wr), n, dtype=np.int64)  # sentinel col n
        self.row_valid = np.zeros((m, wr), dtype=bool)
        slot_of = {}
        for r in range(m):
            cols = h.row_index[r]
            self.row_cols[r, : len(cols)] = cols
            self.row_valid[r, : len(cols)] = True
            for t, c in enumerate(cols):
                slot_of[(r, int(c))] = r * wr + t
        # column gather: for each col, flat row-major slots of its edges;
        # sentinel slot m*wr reads a constant 0 contribution
        self.col_slots = np.full((n, wc), m * wr, dtype=np.int64)
        for c in range(n):
            for u, r in enumerate(h.col_index[c]):
                self.col_slots[c, u] = slot_of[(int(r), c)]

    def col_sums(self, c2v: np.ndarray) -> np.ndarray:
        flat = np.append(c2v.ravel(), 0.0)
        return flat[self.col_slots].sum(axis=1)

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        ext = np.append(bits, 0)
        return np.bitwise_xor.reduce(ext[self.row_cols], axis=1)


def _workspace(code_or_h) -> _Workspace:
    if isinstance(code_or_h, LdpcCode):
        cache = code_or_h._decoder_cache
        if "ws" not in cache:
            cache["ws"] = _Workspace(code_or_h.h)
        return cache["ws"]
    h = code_or_h
    if not hasattr(h, "_decoder_ws"):
        h._decoder_ws = _Workspace(h)
    return h._decoder_ws


def _boxplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    mag = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    return mag + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))


def _minsum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def _leave_one_out(msgs: np.ndarray, op) -> np.ndarray:
    """Per-row combine of all entries except self (identity-padded)."""
    m, w = msgs.shape
    fwd = np.empty((m, w + 1))
    fwd[:, 0] = _IDENT
    for t in range(w):
        fwd[:, t + 1] = op(fwd[:, t], msgs[:, t])
    bwd = np.empty((m, w + 1))
    bwd[:, w] = _IDENT
    for t in range(w - 1, -1, -1):
        bwd[:, t] = op(bwd[:, t + 1], msgs[:, t])
    return op(fwd[:, :w], bwd[:, 1:])


def syndrome(bits: np.ndarray, code_or_h) -> np.ndarray:
    ws = _workspace(code_or_h)
    return ws.syndrome(np.asarray(bits, dtype=np.uint8)).astype(np.uint8)


def decode_spa(
    input_llrs: np.ndarray,
    code_or_h,
    max_iters: int = 50,
    variant: str = "sum-product",
    nms_alpha: float = 0.8,
    early_stop: bool = True,
) -> DecodeResult:
    """Flooding belief propagation over one codeword.

    input_llrs may contain exact zeros (erasures). Convergence is checked
    before each iteration, so an input that is already a confident codeword
    reports converged in iteration 1 without message passing.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    ws = _workspace(code_or_h)
    input_llrs = np.asarray(input_llrs, dtype=np.float64)
    if input_llrs.shape != (ws.n,):
        raise ValueError(f"expected {ws.n} LLRs, got {input_llrs.shape}")
    if not np.all(np.isfinite(input_llrs)):
        raise ValueError("input LLRs must be finite")

    op = _boxplus if variant == "sum-product" else _minsum
    scale = nms_alpha if variant == "normalized-min-sum" else 1.0

    c2v = np.zeros((ws.m, ws.wr))
    total = input_llrs.copy()
    converged = False
    iterations_used = max_iters
    for iteration in range(1, max_iters + 1):
        iterations_used = iteration
        if early_stop:
            bits = hard_decisions(total)
            if not ws.syndrome(bits).any() and np.all(total != 0.0):
                converged = True
                break
        ext = np.append(total, np.inf)  # sentinel col never contributes
        v2c = ext[ws.row_cols] - c2v
        v2c = np.where(ws.row_valid, np.clip(v2c, -LLR_MAX, LLR_MAX), _IDENT)
        c2v = _leave_one_out(v2c, op)
        if scale != 1.0:
            c2v *= scale
        c2v = np.where(ws.row_valid, np.clip(c2v, -LLR_MAX, LLR_MAX), 0.0)
        total = input_llrs + ws.col_sums(c2v)
    else:
        bits = hard_decisions(total)
        if not ws.syndrome(bits).any() and np.all(total != 0.0):
            converged = True

    hard = hard_decisions(total)
    return DecodeResult(
        posterior=clamp(total),
        extrinsic=clamp(total - input_llrs),
        hard_bits=hard,
        converged=converged,
        iterations_used=iterations_used,
    )


def parse_variant(spec: str):
    """'sum-product' | 'min-sum' | 'normalized-min-sum[:alpha]' -> (name, alpha)."""
    if ":" in spec:
        name, _, alpha_s = spec.partition(":")
        name = name.strip()
        if name != "normalized-min-sum":
            raise ValueError(f"variant {name!r} takes no parameter")
        try:
            alpha = float(alpha_s)
        except ValueError:
            raise ValueError(f"bad scale factor {alpha_s!r}") from None
        if not 0 < alpha <= 1:
            raise ValueError("scale factor must be in (0, 1]")
        return name, alpha
    name = spec.strip()
    if name not in VARIANTS:
        raise ValueError(f"unknown variant {name!r}; choose from {VARIANTS}")
    return name, 0.8
