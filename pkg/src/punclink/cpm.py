"""Continuous-phase modulation: waveforms, phase trellis, SISO demodulation.

Symbols are alphabet indices 0..q-1 mapped to bipolar levels
a = 2*idx - (q - 1); the all-zero bit word maps to index 0, so an all-zero
MSK frame is a pure tone at -h/(2T). The transmitted phase is

    phi(t) = pi/p * m_k + 2 pi sum_{i=k-L+1..k} h_i a_i q(t - iT)

inside symbol k, where m_k tracks (mod 2p) the accumulated contribution of
symbols that have left the L-symbol window and q() integrates the REC or RC
frequency pulse (q(L T) = 1/2). Modulation indices cycle through a finite
h set with common denominator p. Frames start at phase state 0 with the
correlative window filled with virtual index-0 symbols.

The demodulator is a forward-backward message pass over the joint state
(phase, correlative history, h-cycle position); with the exact max*
accumulator (logaddexp) it computes true per-bit posteriors, with max_log
it degrades to the max approximation. Output is extrinsic: posterior minus
the supplied prior, clamped to +/-LLR_MAX.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .llr import clamp

_NEG_INF = -np.inf


@dataclass(frozen=True)
class CpmConfig:
    q: int
    h_num: tuple  # numerators over the common denominator p
    p: int
    pulse: str  # "rec" | "rc"
    span: int  # frequency pulse length L in symbols
    sps: int = 8
    bit_map: str = "gray"
    precode: bool = False  # binary h=1/2 differential precoding

    def __post_init__(self):
        if self.q < 2 or self.q & (self.q - 1):
            raise ValueError("alphabet size must be a power of two >= 2")
        if self.p < 1 or not self.h_num:
            raise ValueError("modulation index set is empty")
        if any(not 0 < num < 2 * self.p for num in self.h_num):
            raise ValueError("modulation indices must lie in (0, 2)")
        if self.pulse not in ("rec", "rc"):
            raise ValueError(f"unknown frequency pulse {self.pulse!r}")
        if self.span < 1:
            raise ValueError("pulse span must be >= 1 symbol")
        if self.sps < 1:
            raise ValueError("samples per symbol must be >= 1")
        if self.bit_map not in ("gray", "natural"):
            raise ValueError(f"unknown bit map {self.bit_map!r}")
        if self.precode and (
            self.q != 2 or self.span != 1 or self.h_num != (1,) or self.p != 2
        ):
            # the precoder's state-to-bit identity only holds for h=1/2 1REC
            raise ValueError("precoding requires q=2, h=1/2, full response")

    @property
    def bits_per_symbol(self) -> int:
        return self.q.bit_length() - 1

    @property
    def h_count(self) -> int:
        return len(self.h_num)

    @property
    def n_phase_states(self) -> int:
        return 2 * self.p

    def h_values(self) -> tuple:
        return tuple(Fraction(num, self.p) for num in self.h_num)


def make_cpm_config(q, h, pulse, span, sps=8, bit_map="gray",
                    precode=False) -> CpmConfig:
    """Build a config from modulation indices given as fractions/strings."""
    fracs = [Fraction(x) for x in h]
    if not fracs:
        raise ValueError("need at least one modulation index")
    p = 1
    for f in fracs:
        p = p * f.denominator // math.gcd(p, f.denominator)
    if p > 4096:
        raise ValueError(f"modulation indices have no workable common base (p={p})")
    nums = tuple(int(f.numerator * (p // f.denominator)) for f in fracs)
    return CpmConfig(
        q=int(q), h_num=nums, p=p, pulse=pulse, span=int(span),
        sps=int(sps), bit_map=bit_map, precode=bool(precode),
    )


def preset(name: str, sps: int = 8, bit_map: str = "gray") -> CpmConfig:
    """Named configurations.

    "msk": binary h=1/2 full-response REC with differential precoding, so
    coherent demodulation tracks the antipodal-signaling BER curve instead
    of paying the doubled-error-event penalty of the bare phase trellis.
    "artm-like": quaternary multi-h {4/16, 5/16} 3RC. Approximate stand-in
    for aeronautical telemetry waveforms; qualitative comparisons only.
    """
    if name == "msk":
        return make_cpm_config(2, ["1/2"], "rec", 1, sps=sps, bit_map=bit_map,
                               precode=True)
    if name == "artm-like":
        return make_cpm_config(4, ["4/16", "5/16"], "rc", 3, sps=sps, bit_map=bit_map)
    raise ValueError(f"unknown CPM preset {name!r}")


def phase_pulse(cfg: CpmConfig, tau) -> np.ndarray:
    """q(tau) in symbol units: 0 before 0, 1/2 at and after span."""
    tau = np.asarray(tau, dtype=np.float64)
    L = cfg.span
    t = np.clip(tau, 0.0, L)
    if cfg.pulse == "rec":
        ramp = t / (2.0 * L)
    else:  # raised-cosine frequency pulse
        ramp = t / (2.0 * L) - np.sin(2.0 * np.pi * t / L) / (4.0 * np.pi)
    return ramp


def _phase_grid(cfg: CpmConfig) -> np.ndarray:
    """(span, sps) table of q(d + s/sps)."""
    d = np.arange(cfg.span)[:, None]
    s = np.arange(cfg.sps)[None, :] / cfg.sps
    return phase_pulse(cfg, d + s)


# ---------------------------------------------------------------------------
# bit mapping


def _gray_decode(x: int) -> int:
    y = x
    shift = 1
    while (x >> shift) > 0:
        y ^= x >> shift
        shift += 1
    return y


@lru_cache(maxsize=None)
def symbol_bit_table(q: int, bit_map: str) -> np.ndarray:
    """(q, m) table: MSB-first bit label of each symbol index."""
    m = q.bit_length() - 1
    table = np.zeros((q, m), dtype=np.uint8)
    for idx in range(q):
        word = (idx ^ (idx >> 1)) if bit_map == "gray" else idx
        for j in range(m):
            table[idx, j] = (word >> (m - 1 - j)) & 1
    return table


def bits_to_symbols(bits: np.ndarray, cfg: CpmConfig) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    m = cfg.bits_per_symbol
    if bits.shape[-1] % m:
        raise ValueError(f"bit count {bits.shape[-1]} not divisible by {m}")
    words = bits.reshape(bits.shape[:-1] + (-1, m))
    packed = np.zeros(words.shape[:-1], dtype=np.int64)
    for j in range(m):
        packed = (packed << 1) | words[..., j]
    if cfg.bit_map == "natural":
        return packed
    lut = np.array([_gray_decode(x) for x in range(cfg.q)], dtype=np.int64)
    return lut[packed]


def symbols_to_bits(symbols: np.ndarray, cfg: CpmConfig) -> np.ndarray:
    table = symbol_bit_table(cfg.q, cfg.bit_map)
    out = table[np.asarray(symbols, dtype=np.int64)]
    return out.reshape(out.shape[:-2] + (-1,))


# ---------------------------------------------------------------------------
# modulation


def precode_bits(bits: np.ndarray) -> np.ndarray:
    """Differential transform u[k] = b[k] xor b[k-1] (b[-1] = 0).

    An all-zero input stays all-zero, preserving the tone property, while
    the minimum-distance phase-trellis error events (which always flip two
    consecutive symbols) collapse to single information-bit errors.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    out = bits.copy()
    out[1:] ^= bits[:-1]
    return out


def modulate(bits: np.ndarray, cfg: CpmConfig) -> np.ndarray:
    """Complex baseband samples, sps per symbol, unit envelope."""
    if cfg.precode:
        bits = precode_bits(np.asarray(bits, dtype=np.uint8))
    idx = bits_to_symbols(bits, cfg)
    if idx.ndim != 1:
        raise ValueError("modulate expects a single frame of bits")
    T = len(idx)
    L, Nh, p, sps = cfg.span, cfg.h_count, cfg.p, cfg.sps
    q_levels = cfg.q
    nums = np.asarray(cfg.h_num, dtype=np.int64)

    ext_idx = np.concatenate([np.zeros(L - 1, dtype=np.int64), idx])
    a_ext = 2 * ext_idx - (q_levels - 1)
    num_ext = nums[np.arange(-(L - 1), T) % Nh]
    w = num_ext * a_ext

    # accumulated phase state, exact in units of pi/p
    m_cum = np.concatenate([[0], np.cumsum(w[: T - 1])]) % (2 * p)
    theta = np.pi * m_cum / p

    grid = _phase_grid(cfg)
    phase = np.repeat(theta[:, None], sps, axis=1)
    for d in range(L):
        sl = slice(L - 1 - d, L - 1 - d + T)
        contrib = (num_ext[sl] * a_ext[sl]).astype(np.float64)
        phase = phase + (2.0 * np.pi / p) * contrib[:, None] * grid[d][None, :]
    return np.exp(1j * phase).ravel()


# ---------------------------------------------------------------------------
# trellis


class CpmTrellis:
    """Joint (phase, history, h-cycle) trellis with per-branch waveforms.

    Branch waveforms factor as exp(j*theta_state) times one of
    q^span * h_count base waveforms, so the demodulator correlates the
    received samples against the base set once and applies state phases as
    rotations.
    """

    def __init__(self, cfg: CpmConfig):
        self.cfg = cfg
        q, L, Nh, p = cfg.q, cfg.span, cfg.h_count, cfg.p
        n_hist = q ** (L - 1)
        S = 2 * p * n_hist * Nh
        self.n_states = S
        self.n_branches = S * q
        nums = cfg.h_num
        grid = _phase_grid(cfg)

        def state_id(m_ph, hist, c):
            code = 0
            for j, hsym in enumerate(hist):
                code += hsym * (q ** j)
            return (m_ph * n_hist + code) * Nh + c

        def alpha_level(idx):
            return 2 * idx - (q - 1)

        n_w0 = Nh * n_hist * q
        self.base_waves = np.zeros((n_w0, cfg.sps), dtype=np.complex128)
        built = np.zeros(n_w0, dtype=bool)

        def wave_id(c, hist, u):
            code = 0
            for j, hsym in enumerate(hist):
                code += hsym * (q ** j)
            return (c * n_hist + code) * q + u

        self.next_state = np.zeros((S, q), dtype=np.int64)
        self.w0_of_branch = np.zeros((S, q), dtype=np.int64)
        self.state_theta = np.zeros(S)
        self.m_of_state = np.zeros(S, dtype=np.int64)

        from itertools import product

        for m_ph in range(2 * p):
            for hist in product(range(q), repeat=L - 1):
                for c in range(Nh):
                    s = state_id(m_ph, hist, c)
                    self.state_theta[s] = np.pi * m_ph / p
                    self.m_of_state[s] = m_ph
                    for u in range(q):
                        leaving = hist[0] if L > 1 else u
                        h_out = nums[(c - (L - 1)) % Nh]
                        m_next = (m_ph + h_out * alpha_level(leaving)) % (2 * p)
                        nhist = (hist + (u,))[1:]  # stays empty when L == 1
                        self.next_state[s, u] = state_id(m_next, nhist, (c + 1) % Nh)
                        wid = wave_id(c, hist, u)
                        self.w0_of_branch[s, u] = wid
                        if not built[wid]:
                            built[wid] = True
                            window = (u,) + tuple(reversed(hist))  # ages 0..L-1
                            phase = np.zeros(cfg.sps)
                            for d, sym in enumerate(window):
                                hn = nums[(c - d) % Nh]
                                phase = phase + (
                                    2.0 * np.pi * hn / p
                                ) * alpha_level(sym) * grid[d]
                            self.base_waves[wid] = np.exp(1j * phase)

        self.initial_state = state_id(0, (0,) * (L - 1), 0)
        self.cos_theta = np.cos(self.state_theta)
        self.sin_theta = np.sin(self.state_theta)

        # incoming-branch tables: every state has exactly q predecessors
        fill = np.zeros(S, dtype=np.int64)
        self.in_prev = np.zeros((S, q), dtype=np.int64)
        self.in_sym = np.zeros((S, q), dtype=np.int64)
        self.in_w0 = np.zeros((S, q), dtype=np.int64)
        for s in range(S):
            for u in range(q):
                t = self.next_state[s, u]
                slot = fill[t]
                if slot >= q:
                    raise AssertionError("trellis in-degree exceeds q")
                self.in_prev[t, slot] = s
                self.in_sym[t, slot] = u
                self.in_w0[t, slot] = self.w0_of_branch[s, u]
                fill[t] = slot + 1
        if not np.all(fill == q):
            raise AssertionError("trellis in-degree mismatch")
        self.in_cos = self.cos_theta[self.in_prev]
        self.in_sin = self.sin_theta[self.in_prev]

        reach = {self.initial_state}
        frontier = [self.initial_state]
        while frontier:
            nxt = set(self.next_state[frontier].ravel().tolist())
            frontier = list(nxt - reach)
            reach |= nxt
        if len(reach) != S:
            raise ValueError(
                f"{S - len(reach)} trellis states unreachable from the start "
                "state; this modulation index set is not supported"
            )

        # half-weight bit signs for prior metrics: +L/2 favors bit 0
        table = symbol_bit_table(cfg.q, cfg.bit_map).astype(np.float64)
        self.prior_map = 0.5 * (1.0 - 2.0 * table)  # (q, m)

        self.vsign = None
        self.vnext = None
        if cfg.precode:
            # information-bit sign as a function of the landing state: after
            # n symbols the running product of +/-1 levels is fixed by the
            # phase index mod 4, so the precoded bit at step k = n-1 is
            # readable off the time-(k+1) state occupancy.
            self.vsign = np.zeros((4, S))
            for nmod in range(4):
                parity = 1.0 if nmod % 2 == 0 else -1.0
                self.vsign[nmod] = parity * np.where(
                    self.m_of_state == nmod, 1.0, -1.0
                )
            self.vnext = self.vsign[:, self.next_state]  # (4, S, q)


@lru_cache(maxsize=None)
def build_trellis(cfg: CpmConfig) -> CpmTrellis:
    return CpmTrellis(cfg)


# ---------------------------------------------------------------------------
# SISO demodulation


def siso_demodulate_batch(
    rx: np.ndarray,
    priors: np.ndarray,
    noise_var: float,
    trellis: CpmTrellis,
    max_log: bool = False,
) -> np.ndarray:
    """Extrinsic bit LLRs for a batch of frames (B, n_samples).

    Frames in a batch are processed with identical per-frame arithmetic, so
    results do not depend on how frames are grouped.
    """
    cfg = trellis.cfg
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    rx = np.asarray(rx, dtype=np.complex128)
    priors = np.asarray(priors, dtype=np.float64)
    if rx.ndim != 2 or priors.ndim != 2:
        raise ValueError("batch inputs must be 2-d")
    B, n_samp = rx.shape
    if n_samp % cfg.sps:
        raise ValueError("sample count not a whole number of symbols")
    T = n_samp // cfg.sps
    m = cfg.bits_per_symbol
    if priors.shape != (B, T * m):
        raise ValueError(f"expected priors of shape {(B, T * m)}")

    acc = np.maximum if max_log else np.logaddexp
    S, q = trellis.n_states, cfg.q

    z = np.matmul(rx.reshape(B, T, cfg.sps), np.conj(trellis.base_waves.T))
    z /= noise_var
    zr, zi = np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag)
    prior_sym = np.matmul(priors.reshape(B, T, m), trellis.prior_map.T)  # (B,T,q)

    alphas = np.full((B, T + 1, S), _NEG_INF)
    alphas[:, 0, trellis.initial_state] = 0.0
    in_prev, in_w0 = trellis.in_prev, trellis.in_w0
    in_cos, in_sin, in_sym = trellis.in_cos, trellis.in_sin, trellis.in_sym
    precode = cfg.precode
    for k in range(T):
        g_in = zr[:, k][:, in_w0] * in_cos + zi[:, k][:, in_w0] * in_sin
        if not precode:
            g_in = g_in + prior_sym[:, k][:, in_sym]
        a_new = acc.reduce(alphas[:, k][:, in_prev] + g_in, axis=2)
        if precode:
            # prior attaches to the landing state, identically for all of
            # its in-branches, so it adds after the reduction
            a_new = a_new + 0.5 * priors[:, k][:, None] * trellis.vsign[(k + 1) % 4]
        a_new -= a_new.max(axis=1, keepdims=True)
        alphas[:, k + 1] = a_new

    next_state, w0_br = trellis.next_state, trellis.w0_of_branch
    cos_t = trellis.cos_theta[None, :, None]
    sin_t = trellis.sin_theta[None, :, None]
    beta = np.zeros((B, S))
    out = np.empty((B, T, m))
    bit_table = symbol_bit_table(cfg.q, cfg.bit_map)
    masks0 = [np.nonzero(bit_table[:, j] == 0)[0] for j in range(m)]
    masks1 = [np.nonzero(bit_table[:, j] == 1)[0] for j in range(m)]
    for k in range(T - 1, -1, -1):
        if precode:
            post = alphas[:, k + 1] + beta  # state posterior at time k+1
            plus = trellis.vsign[(k + 1) % 4] > 0
            out[:, k, 0] = acc.reduce(post[:, plus], axis=1) - acc.reduce(
                post[:, ~plus], axis=1
            )
            g_out = (
                zr[:, k][:, w0_br] * cos_t
                + zi[:, k][:, w0_br] * sin_t
                + 0.5 * priors[:, k][:, None, None] * trellis.vnext[(k + 1) % 4]
            )
            inner = g_out + beta[:, next_state]
        else:
            g_out = (
                zr[:, k][:, w0_br] * cos_t
                + zi[:, k][:, w0_br] * sin_t
                + prior_sym[:, k][:, None, :]
            )
            inner = g_out + beta[:, next_state]
            lam = alphas[:, k][:, :, None] + inner
            sym_post = acc.reduce(lam, axis=1)  # (B, q)
            for j in range(m):
                out[:, k, j] = acc.reduce(
                    sym_post[:, masks0[j]], axis=1
                ) - acc.reduce(sym_post[:, masks1[j]], axis=1)
        beta = acc.reduce(inner, axis=2)
        beta -= beta.max(axis=1, keepdims=True)

    return clamp(out.reshape(B, T * m) - priors)


def siso_demodulate(
    rx: np.ndarray,
    priors: np.ndarray,
    noise_var: float,
    trellis: CpmTrellis,
    max_log: bool = False,
) -> np.ndarray:
    """Single-frame wrapper around the batch demodulator."""
    rx = np.asarray(rx, dtype=np.complex128)
    priors = np.asarray(priors, dtype=np.float64)
    if rx.ndim != 1:
        raise ValueError("expected a 1-d sample vector")
    return siso_demodulate_batch(
        rx[None, :], priors[None, :], noise_var, trellis, max_log
    )[0]
