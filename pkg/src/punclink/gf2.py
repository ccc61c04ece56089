"""GF(2) row arithmetic with rows packed 64 bits per word."""

from __future__ import annotations

import numpy as np


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a (m, n) 0/1 matrix into (m, ceil(n/64)) uint64 words.

    Bit i of word w holds column w*64 + i.
    """
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    m, n = bits.shape
    words = (n + 63) // 64
    buf = np.zeros((m, words * 64), dtype=np.uint8)
    buf[:, :n] = bits
    packed = np.packbits(buf, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def unpack_rows(packed: np.ndarray, n_cols: int) -> np.ndarray:
    packed = np.ascontiguousarray(packed)
    bits = np.unpackbits(packed.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :n_cols]


if hasattr(np, "bitwise_count"):

    def popcount(words: np.ndarray) -> np.ndarray:
        return np.bitwise_count(words)

else:  # pragma: no cover - numpy < 2.0 fallback
    _TABLE = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)

    def popcount(words: np.ndarray) -> np.ndarray:
        b = np.ascontiguousarray(words).view(np.uint8)
        return _TABLE[b].reshape(*words.shape, 8).sum(axis=-1)


def gauss_jordan(packed: np.ndarray, n_cols: int):
    """Row-reduce a packed matrix in place (on a copy).

    Scans columns left to right, swaps a pivot row up, clears the column
    everywhere else. Returns (rref, rank, pivot_cols); the pivot columns
    come out in increasing order, which fixes the column permutation used
    for systematic encoding.
    """
    rows = packed.copy()
    m = rows.shape[0]
    pivots = []
    r = 0
    for c in range(n_cols):
        if r == m:
            break
        w, b = divmod(c, 64)
        mask = np.uint64(1) << np.uint64(b)
        below = np.nonzero((rows[r:, w] & mask) != 0)[0]
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            rows[[r, p]] = rows[[p, r]]
        hit = (rows[:, w] & mask) != 0
        hit[r] = False
        if hit.any():
            rows[hit] ^= rows[r]
        pivots.append(c)
        r += 1
    return rows, r, np.asarray(pivots, dtype=np.int64)


def rank(packed: np.ndarray, n_cols: int) -> int:
    return gauss_jordan(packed, n_cols)[1]
