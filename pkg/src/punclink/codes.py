"""LDPC code objects: parity-check matrices, alist I/O, quasi-cyclic
expansion, generator derivation, and the built-in code registry.

The two 1024-bit registry codes are deterministic stand-ins shaped like the
ARTM telemetry codes (N=1024, rates 2/3 and 4/5 to three decimals,
quasi-cyclic structure, girth >= 6). They are built by a seeded search, not
taken from any standard, and no equivalence with deployed matrices is
claimed or implied.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import gf2
from .rng import TAG_CODE_BUILD, stream

MAX_ROW_WEIGHT = 64

STANDIN_SEED = 0x41525430


class AlistError(ValueError):
    """Alist parse failure; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParityCheckMatrix:
    """Sparse binary parity-check matrix stored as a position set."""

    def __init__(self, n_rows: int, n_cols: int, positions):
        if n_rows <= 0 or n_cols <= 0:
            raise ValueError("matrix dimensions must be positive")
        positions = [(int(r), int(c)) for r, c in positions]
        if not positions:
            raise ValueError("matrix has no entries")
        pos = np.asarray(sorted(set(positions)), dtype=np.int64)
        if len(pos) != len(positions):
            raise ValueError("duplicate positions")
        if pos[:, 0].min() < 0 or pos[:, 0].max() >= n_rows:
            raise ValueError("row index out of range")
        if pos[:, 1].min() < 0 or pos[:, 1].max() >= n_cols:
            raise ValueError("column index out of range")
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.positions = pos
        self.row_index = [
            pos[pos[:, 0] == r, 1].copy() for r in range(n_rows)
        ]
        self.col_index = [
            pos[pos[:, 1] == c, 0].copy() for c in range(n_cols)
        ]
        self.row_weights = np.array([len(r) for r in self.row_index])
        self.col_weights = np.array([len(c) for c in self.col_index])
        if self.row_weights.max(initial=0) > MAX_ROW_WEIGHT:
            raise ValueError(
                f"row weight {self.row_weights.max()} exceeds supported "
                f"maximum {MAX_ROW_WEIGHT}"
            )
        self._packed = None

    @classmethod
    def from_dense(cls, dense) -> "ParityCheckMatrix":
        dense = np.asarray(dense)
        rows, cols = np.nonzero(dense)
        return cls(dense.shape[0], dense.shape[1], list(zip(rows, cols)))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        out[self.positions[:, 0], self.positions[:, 1]] = 1
        return out

    def packed_rows(self) -> np.ndarray:
        if self._packed is None:
            self._packed = gf2.pack_rows(self.to_dense())
        return self._packed

    def position_set(self) -> set:
        return set(map(tuple, self.positions.tolist()))


@dataclass(frozen=True)
class CirculantTable:
    """Quasi-cyclic description: per block cell, a tuple of shifts.

    Cell (r, c) with shift s expands to positions
    (r*q_size + i, c*q_size + (i + s) % q_size) for i in [0, q_size).
    """

    q_size: int
    n_block_rows: int
    n_block_cols: int
    shifts: tuple  # shifts[r][c] -> tuple of int shifts, () for empty

    def __post_init__(self):
        if self.q_size < 1:
            raise ValueError("circulant size must be >= 1")
        if len(self.shifts) != self.n_block_rows:
            raise ValueError("shift table has wrong number of block rows")
        for row in self.shifts:
            if len(row) != self.n_block_cols:
                raise ValueError("shift table has wrong number of block cols")
            for cell in row:
                if len(set(cell)) != len(cell):
                    raise ValueError("shift collision within a block cell")
                for s in cell:
                    if not 0 <= s < self.q_size:
                        raise ValueError(f"shift {s} outside [0, {self.q_size})")


def expand_circulants(table: CirculantTable) -> ParityCheckMatrix:
    q = table.q_size
    i = np.arange(q)
    positions = []
    for r, row in enumerate(table.shifts):
        for c, cell in enumerate(row):
            for s in cell:
                rows = r * q + i
                cols = c * q + (i + s) % q
                positions.extend(zip(rows.tolist(), cols.tolist()))
    return ParityCheckMatrix(
        table.n_block_rows * q, table.n_block_cols * q, positions
    )


# ---------------------------------------------------------------------------
# alist serialization
#
# Line 1: "N M" (columns, rows). Line 2: max column weight, max row weight.
# Line 3: N column weights. Line 4: M row weights. Then N lines of 1-based
# row indices per column and M lines of 1-based column indices per row,
# zero-padded to the respective maximum weight. Emission is canonical:
# ascending indices, single spaces, LF line endings.


def _ints(lines, idx, expect=None):
    try:
        vals = [int(tok) for tok in lines[idx].split()]
    except ValueError:
        raise AlistError(idx + 1, "non-integer token") from None
    if expect is not None and len(vals) != expect:
        raise AlistError(idx + 1, f"expected {expect} integers, got {len(vals)}")
    return vals


def parse_alist(text: str) -> ParityCheckMatrix:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) < 4:
        raise AlistError(len(lines) + 1, "truncated file")
    header = _ints(lines, 0)
    if len(header) != 2 or header[0] <= 0 or header[1] <= 0:
        raise AlistError(1, "malformed header, expected 'N M'")
    n, m = header
    maxes = _ints(lines, 1, expect=2)
    max_cw, max_rw = maxes
    col_w = _ints(lines, 2, expect=n)
    row_w = _ints(lines, 3, expect=m)
    if max(col_w, default=0) > max_cw:
        raise AlistError(3, "column weight exceeds declared maximum")
    if max(row_w, default=0) > max_rw:
        raise AlistError(4, "row weight exceeds declared maximum")
    if len(lines) < 4 + n + m:
        raise AlistError(len(lines) + 1, "truncated entry lines")

    col_positions = set()
    for c in range(n):
        vals = [v for v in _ints(lines, 4 + c) if v != 0]
        if len(vals) != col_w[c]:
            raise AlistError(4 + c + 1, f"column {c + 1} weight mismatch")
        for v in vals:
            if not 1 <= v <= m:
                raise AlistError(4 + c + 1, f"row index {v} out of range")
            if (v - 1, c) in col_positions:
                raise AlistError(4 + c + 1, f"duplicate position in column {c + 1}")
            col_positions.add((v - 1, c))

    row_positions = set()
    for r in range(m):
        vals = [v for v in _ints(lines, 4 + n + r) if v != 0]
        if len(vals) != row_w[r]:
            raise AlistError(4 + n + r + 1, f"row {r + 1} weight mismatch")
        for v in vals:
            if not 1 <= v <= n:
                raise AlistError(4 + n + r + 1, f"column index {v} out of range")
            if (r, v - 1) in row_positions:
                raise AlistError(4 + n + r + 1, f"duplicate position in row {r + 1}")
            row_positions.add((r, v - 1))

    if col_positions != row_positions:
        raise AlistError(4 + n + 1, "row and column lists disagree")
    return ParityCheckMatrix(m, n, list(col_positions))


def emit_alist(h: ParityCheckMatrix) -> str:
    n, m = h.n_cols, h.n_rows
    max_cw = int(h.col_weights.max(initial=0))
    max_rw = int(h.row_weights.max(initial=0))
    out = [f"{n} {m}", f"{max_cw} {max_rw}"]
    out.append(" ".join(str(int(w)) for w in h.col_weights))
    out.append(" ".join(str(int(w)) for w in h.row_weights))
    for c in range(n):
        vals = [str(int(r) + 1) for r in h.col_index[c]]
        vals += ["0"] * (max_cw - len(vals))
        out.append(" ".join(vals))
    for r in range(m):
        vals = [str(int(c) + 1) for c in h.row_index[r]]
        vals += ["0"] * (max_rw - len(vals))
        out.append(" ".join(vals))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# generator derivation and encoding


@dataclass
class GeneratorMatrix:
    """Systematic generator [I_k | P] over permuted columns.

    col_permutation[i] is the original column occupying permuted position i;
    the first k permuted positions are the systematic (information) columns.
    """

    k: int
    n: int
    col_permutation: np.ndarray
    parity_packed: np.ndarray  # (k, words) packed rows of P
    n_parity: int

    def to_dense(self) -> np.ndarray:
        p = gf2.unpack_rows(self.parity_packed, self.n_parity)
        g_perm = np.concatenate([np.eye(self.k, dtype=np.uint8), p], axis=1)
        g = np.zeros((self.k, self.n), dtype=np.uint8)
        g[:, self.col_permutation] = g_perm
        return g


def derive_generator(h: ParityCheckMatrix) -> GeneratorMatrix:
    """Gauss-Jordan on H with recorded column permutation.

    Rank deficiencies are tolerated: k = n - rank(H). The permutation puts
    the non-pivot (information) columns first, pivot (parity) columns last.
    """
    n = h.n_cols
    rref, r, pivot_cols = gf2.gauss_jordan(h.packed_rows(), n)
    free_mask = np.ones(n, dtype=bool)
    free_mask[pivot_cols] = False
    free_cols = np.nonzero(free_mask)[0]
    k = n - r
    dense = gf2.unpack_rows(rref[:r], n)
    p = dense[:, free_cols].T  # (k, r)
    return GeneratorMatrix(
        k=k,
        n=n,
        col_permutation=np.concatenate([free_cols, pivot_cols]).astype(np.int64),
        parity_packed=gf2.pack_rows(p) if k else np.zeros((0, 1), dtype=np.uint64),
        n_parity=r,
    )


def encode(x: np.ndarray, code: "LdpcCode") -> np.ndarray:
    """Systematic encoding: x appears at code.systematic_cols of the output."""
    gen = code.generator
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (gen.k,):
        raise ValueError(f"info word must have length {gen.k}")
    sel = gen.parity_packed[x.astype(bool)]
    if len(sel):
        parity_words = np.bitwise_xor.reduce(sel, axis=0)
    else:
        parity_words = np.zeros(gen.parity_packed.shape[1], dtype=np.uint64)
    parity = gf2.unpack_rows(parity_words[None, :], gen.n_parity)[0]
    y = np.empty(gen.n, dtype=np.uint8)
    y[gen.col_permutation] = np.concatenate([x, parity])
    return y


def syndrome(bits: np.ndarray, h: ParityCheckMatrix) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    out = np.zeros(h.n_rows, dtype=np.uint8)
    for r in range(h.n_rows):
        out[r] = bits[h.row_index[r]].sum() & 1
    return out


# ---------------------------------------------------------------------------
# registry


@dataclass
class LdpcCode:
    name: str
    h: ParityCheckMatrix
    generator: GeneratorMatrix
    rate: Fraction  # exact (n - rank) / n
    nominal_rate: Fraction  # design rate used for rate arithmetic
    circulants: CirculantTable | None = None
    trimmed_rows: int = 0
    _decoder_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.h.n_cols

    @property
    def k(self) -> int:
        return self.generator.k

    @property
    def systematic_cols(self) -> np.ndarray:
        return self.generator.col_permutation[: self.k]


def _registry_code(name, h, nominal, circulants=None, trimmed=0) -> LdpcCode:
    gen = derive_generator(h)
    rate = Fraction(gen.k, h.n_cols)
    return LdpcCode(
        name=name,
        h=h,
        generator=gen,
        rate=rate,
        nominal_rate=nominal,
        circulants=circulants,
        trimmed_rows=trimmed,
    )


def _hamming_7_4() -> LdpcCode:
    h = ParityCheckMatrix.from_dense(
        [
            [1, 0, 1, 0, 1, 0, 1],
            [0, 1, 1, 0, 0, 1, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ]
    )
    return _registry_code("hamming-7-4", h, Fraction(4, 7))


def _toy_tree() -> LdpcCode:
    # Cycle-free factor graph: checks chained through shared variables.
    h = ParityCheckMatrix(
        4,
        9,
        [(0, 0), (0, 1), (0, 2), (1, 2), (1, 3), (1, 4),
         (2, 4), (2, 5), (2, 6), (3, 6), (3, 7), (3, 8)],
    )
    return _registry_code("toy-tree", h, Fraction(5, 9))


def _pick_base(rng, n_rows: int, n_cols: int, col_weight: int,
               min_row: int, max_row: int):
    """Column-weight-regular base matrix with bounded row degrees."""
    for _ in range(64):
        cols = [np.sort(rng.choice(n_rows, size=col_weight, replace=False))
                for _ in range(n_cols)]
        counts = np.zeros(n_rows, dtype=int)
        for rows in cols:
            counts[rows] += 1
        if counts.min() >= min_row and counts.max() <= max_row:
            return [tuple(int(r) for r in rows) for rows in cols]
    return None


def _pick_shifts(rng, cols, q: int):
    """Greedy shift selection keeping the lifted graph free of 4-cycles.

    A 4-cycle appears iff two columns sharing a base row pair get the same
    shift difference on that pair, so per-pair differences must be unique.
    """
    used: dict = {}
    shifts = []
    for rows in cols:
        pairs = list(itertools.combinations(range(len(rows)), 2))
        for _ in range(400):
            cand = rng.integers(0, q, size=len(rows))
            diffs = {}
            ok = True
            for a, b in pairs:
                key = (rows[a], rows[b])
                d = int(cand[a] - cand[b]) % q
                if d in used.get(key, ()) or diffs.get(key) == d:
                    ok = False
                    break
                diffs[key] = d
            if ok:
                for key, d in diffs.items():
                    used.setdefault(key, set()).add(d)
                shifts.append(tuple(int(s) for s in cand))
                break
        else:
            return None
    return shifts


def _build_standin(name: str, nominal: Fraction, base_rows: int,
                   target_rows: int) -> LdpcCode:
    """Deterministic quasi-cyclic stand-in, trimmed to the target row count.

    11x32 or 7x32 base, lift 32, column weight 3. The seeded search retries
    with a bumped attempt counter until the trimmed matrix is full rank;
    trimming rows only removes cycles, so girth >= 6 established on the full
    lift carries over.
    """
    q = 32
    base_cols = 32
    col_weight = 3
    avg = base_cols * col_weight / base_rows
    min_row, max_row = max(2, int(avg) - 4), int(avg) + 5
    for attempt in itertools.count():
        rng = stream(STANDIN_SEED, TAG_CODE_BUILD, point=attempt)
        cols = _pick_base(rng, base_rows, base_cols, col_weight, min_row, max_row)
        if cols is None:
            continue
        col_shifts = _pick_shifts(rng, cols, q)
        if col_shifts is None:
            continue
        table_cells = [[() for _ in range(base_cols)] for _ in range(base_rows)]
        for c, (rows, shifts) in enumerate(zip(cols, col_shifts)):
            for r, s in zip(rows, shifts):
                table_cells[r][c] = (s,)
        table = CirculantTable(
            q_size=q,
            n_block_rows=base_rows,
            n_block_cols=base_cols,
            shifts=tuple(tuple(row) for row in table_cells),
        )
        full = expand_circulants(table)
        keep = full.positions[:, 0] < target_rows
        h = ParityCheckMatrix(
            target_rows, full.n_cols, full.positions[keep].tolist()
        )
        if gf2.rank(h.packed_rows(), h.n_cols) != target_rows:
            continue
        code = _registry_code(
            name, h, nominal,
            circulants=table, trimmed=full.n_rows - target_rows,
        )
        return code


_REGISTRY = {
    "standin-artm0-r23-n1024": lambda: _build_standin(
        "standin-artm0-r23-n1024", Fraction(2, 3), base_rows=11, target_rows=341
    ),
    "standin-r45-n1024": lambda: _build_standin(
        "standin-r45-n1024", Fraction(4, 5), base_rows=7, target_rows=205
    ),
    "hamming-7-4": _hamming_7_4,
    "toy-tree": _toy_tree,
}

REGISTRY_NAMES = tuple(sorted(_REGISTRY))


@lru_cache(maxsize=None)
def build_standard_code(name: str) -> LdpcCode:
    try:
        builder = _REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown code {name!r}; registry: {', '.join(REGISTRY_NAMES)}"
        ) from None
    return builder()


def load_alist_code(path: str) -> LdpcCode:
    """Drop-in for externally supplied matrices."""
    with open(path, "r", encoding="ascii") as fh:
        h = parse_alist(fh.read())
    gen = derive_generator(h)
    return LdpcCode(
        name=f"alist:{path}",
        h=h,
        generator=gen,
        rate=Fraction(gen.k, h.n_cols),
        nominal_rate=Fraction(gen.k, h.n_cols),
    )


def alist_digest(h: ParityCheckMatrix) -> str:
    return hashlib.sha256(emit_alist(h).encode("ascii")).hexdigest()
