"""End-to-end BER/FER simulation runs.

A run is a sweep over (delta, Eb/N0) points. Every frame is generated,
transmitted and decoded by per-frame deterministic kernels: information
bits, channel noise and (optionally) per-codeword puncture patterns come
from counter-based streams keyed by (seed, purpose, point, trial). Frames
therefore never depend on batch composition or worker count, and all
aggregation uses integer accumulators, so a sweep writes byte-identical
CSV output for any --workers value.

Accumulation proceeds in fixed-size rounds of batch_frames; the stop rule
(enough frame errors, or the frame cap) is evaluated only at round
boundaries so that early stopping cannot depend on scheduling either.
"""

from __future__ import annotations

import json
import multiprocessing
import os
import time
from dataclasses import dataclass, fields
from fractions import Fraction

import numpy as np

from . import cpm as cpm_mod
from .channel import add_awgn, bpsk_llr, bpsk_modulate, ebn0_to_noise_var
from .codes import REGISTRY_NAMES, LdpcCode, build_standard_code, encode, load_alist_code
from .decoder import decode_spa, parse_variant
from .framing import DEFAULT_ASM_BITS, DEFAULT_ASM_HEX, FrameConfig, asm_priors
from .llr import perfect_llrs
from .puncturing import (
    PuncturePattern,
    deinterleave,
    depuncture,
    interleave,
    make_permutation,
    n_punctured,
    puncture,
    sample_pattern,
)
from .rng import TAG_INFO_BITS, TAG_NOISE, TAG_PATTERN_TRIAL, stream


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    mode: str = "no-cpm"
    code: str = "standin-artm0-r23-n1024"
    cpm: str = "msk"
    delta: str = "0"
    ebn0: str = "0:8:0.5"
    seed: int = 1
    workers: int = 1
    out: str = "results.csv"
    global_iters: int = 5
    ldpc_iters: int = 0  # 0 means the per-mode default (50 no-cpm, 10 cpm)
    variant: str = "sum-product"
    max_log: bool = False
    batch_frames: int = 256
    min_frame_errors: int = 100
    max_frames: int = 1_000_000
    pattern_per_codeword: bool = False
    asm_in_snr: bool = False
    sps: int = 8
    bit_map: str = "gray"
    asm_hex: str = DEFAULT_ASM_HEX
    asm_len: int = DEFAULT_ASM_BITS


_BOOL_KEYS = {"max_log", "pattern_per_codeword", "asm_in_snr"}
_INT_KEYS = {
    "seed", "workers", "global_iters", "ldpc_iters", "batch_frames",
    "min_frame_errors", "max_frames", "sps", "asm_len",
}


def _parse_bool(raw: str, key: str, line: int) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"line {line}: {key} expects a boolean, got {raw!r}")


def parse_config_text(text: str) -> SimConfig:
    """key = value lines; # starts a comment; unknown keys are errors."""
    known = {f.name for f in fields(SimConfig)}
    cfg = SimConfig()
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        body = rawline.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value, got {body!r}")
        key, _, value = body.partition("=")
        key = key.strip().lower().replace("-", "_")
        value = value.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in _BOOL_KEYS:
            parsed = _parse_bool(value, key, lineno)
        elif key in _INT_KEYS:
            try:
                parsed = int(value)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: {key} expects an integer, got {value!r}"
                ) from None
        else:
            parsed = value
        setattr(cfg, key, parsed)
    return cfg


def load_config(path: str) -> SimConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def parse_delta_list(spec: str):
    """Comma list of puncturing percentages; echo strings are preserved."""
    out = []
    for token in str(spec).split(","):
        token = token.strip()
        if not token:
            raise ConfigError(f"empty delta entry in {spec!r}")
        try:
            value = Fraction(token)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad delta value {token!r}") from None
        if not 0 <= value < 100:
            raise ConfigError(f"delta {token} out of range [0, 100)")
        out.append((token, value))
    return out


def parse_snr_list(spec: str):
    """Either start:stop:step (inclusive) or a comma list of dB values."""
    spec = str(spec).strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"SNR range must be start:stop:step, got {spec!r}")
        try:
            start, stop, step = (Fraction(p.strip()) for p in parts)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad SNR range {spec!r}") from None
        if step <= 0:
            raise ConfigError("SNR step must be positive")
        if stop < start:
            raise ConfigError("SNR range end precedes start")
        count = int((stop - start) / step) + 1
        return [float(start + i * step) for i in range(count)]
    values = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            raise ConfigError(f"empty SNR entry in {spec!r}")
        try:
            values.append(float(Fraction(token)))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad SNR value {token!r}") from None
    return values


# ---------------------------------------------------------------------------
# resolved run state


@dataclass
class RunContext:
    sim: SimConfig
    code: LdpcCode
    perm: object
    frame_cfg: FrameConfig
    trellis: object  # CpmTrellis in cpm mode, else None
    ldpc_iters: int
    variant: str
    nms_alpha: float


@dataclass
class PointSpec:
    index: int
    delta_echo: str
    delta: Fraction
    ebn0_db: float
    n_punct: int
    n_surv: int
    n_pad: int
    noise_var: float
    effective_rate: float
    esn0_db: float
    pattern: PuncturePattern | None  # None when resampled per codeword


@dataclass
class Accum:
    frames: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    coded_bit_errors: int = 0
    sum_local_iters: int = 0
    sum_global_iters: int = 0
    bit_errors_sq: int = 0  # sum over frames of (per-frame bit errors)^2

    def merge(self, other: "Accum") -> None:
        for f in fields(Accum):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


def build_context(sim: SimConfig) -> RunContext:
    if sim.mode not in ("no-cpm", "cpm"):
        raise ConfigError(f"unknown mode {sim.mode!r}")
    if sim.code.startswith("alist:"):
        code = load_alist_code(sim.code[len("alist:"):])
    else:
        try:
            code = build_standard_code(sim.code)
        except ValueError:
            names = ", ".join(REGISTRY_NAMES)
            raise ConfigError(
                f"unknown code {sim.code!r} (registry: {names}; or alist:<path>)"
            ) from None
    if sim.seed < 0:
        raise ConfigError("seed must be non-negative")
    if sim.workers < 1:
        raise ConfigError("workers must be >= 1")
    if sim.batch_frames < 1:
        raise ConfigError("batch_frames must be >= 1")
    if sim.max_frames < 1:
        raise ConfigError("max_frames must be >= 1")
    if sim.global_iters < 1:
        raise ConfigError("global_iters must be >= 1")
    variant, alpha = parse_variant(sim.variant)
    ldpc_iters = sim.ldpc_iters
    if ldpc_iters <= 0:
        ldpc_iters = 10 if sim.mode == "cpm" else 50
    perm = make_permutation(sim.seed, code.n)
    frame_cfg = FrameConfig(asm_hex=sim.asm_hex, asm_len=sim.asm_len)
    trellis = None
    if sim.mode == "cpm":
        cfg = cpm_mod.preset(sim.cpm, sps=sim.sps, bit_map=sim.bit_map)
        trellis = cpm_mod.build_trellis(cfg)
    return RunContext(
        sim=sim, code=code, perm=perm, frame_cfg=frame_cfg, trellis=trellis,
        ldpc_iters=ldpc_iters, variant=variant, nms_alpha=alpha,
    )


def make_point(ctx: RunContext, index: int, delta_echo: str, delta: Fraction,
               ebn0_db: float) -> PointSpec:
    code = ctx.code
    n_p = n_punctured(delta, code.n)
    n_surv = code.n - n_p
    if n_surv < code.k:
        raise ConfigError(
            f"delta {delta_echo} leaves {n_surv} coded bits for {code.k} "
            "information bits; the punctured rate exceeds 1"
        )
    if ctx.sim.mode == "cpm":
        m = ctx.trellis.cfg.bits_per_symbol
        asm_len = ctx.frame_cfg.asm_len
        n_pad = (-(asm_len + n_surv)) % m
        n_sym = (asm_len + n_surv + n_pad) // m
        known = asm_len + n_pad if ctx.sim.asm_in_snr else 0
        eff_rate = (code.k + known) / n_sym
        noise_var = ebn0_to_noise_var(
            ebn0_db, eff_rate, energy_per_symbol=float(ctx.trellis.cfg.sps)
        )
    else:
        n_pad = 0
        eff_rate = code.k / n_surv
        noise_var = ebn0_to_noise_var(ebn0_db, eff_rate)
    esn0_db = ebn0_db + 10.0 * np.log10(eff_rate)
    pattern = None
    if not ctx.sim.pattern_per_codeword:
        pattern = sample_pattern(ctx.sim.seed, code.n, n_p)
    return PointSpec(
        index=index, delta_echo=delta_echo, delta=delta, ebn0_db=ebn0_db,
        n_punct=n_p, n_surv=n_surv, n_pad=n_pad, noise_var=noise_var,
        effective_rate=eff_rate, esn0_db=esn0_db, pattern=pattern,
    )


def _frame_pattern(ctx: RunContext, pt: PointSpec, trial: int) -> PuncturePattern:
    if pt.pattern is not None:
        return pt.pattern
    rng = stream(ctx.sim.seed, TAG_PATTERN_TRIAL, point=pt.index, trial=trial)
    return sample_pattern(rng, ctx.code.n, pt.n_punct)


def _tx_frame(ctx: RunContext, pt: PointSpec, trial: int):
    """Information bits, codeword and punctured transmit bits for one trial."""
    seed = ctx.sim.seed
    rng = stream(seed, TAG_INFO_BITS, point=pt.index, trial=trial)
    info = rng.integers(0, 2, size=ctx.code.k, dtype=np.uint8)
    cw = encode(info, ctx.code)
    pattern = _frame_pattern(ctx, pt, trial)
    tx = puncture(interleave(cw, ctx.perm), pattern)
    return info, cw, pattern, tx


def _score(acc: Accum, info, cw, hard_bits, sys_cols, local_iters, global_iters):
    e = int(np.count_nonzero(hard_bits[sys_cols] != info))
    acc.frames += 1
    acc.bit_errors += e
    acc.bit_errors_sq += e * e
    acc.frame_errors += 1 if e else 0
    acc.coded_bit_errors += int(np.count_nonzero(hard_bits != cw))
    acc.sum_local_iters += local_iters
    acc.sum_global_iters += global_iters


def _chunk_no_cpm(ctx: RunContext, pt: PointSpec, trial_lo: int, n: int) -> Accum:
    acc = Accum()
    sys_cols = ctx.code.systematic_cols
    seed = ctx.sim.seed
    for trial in range(trial_lo, trial_lo + n):
        info, cw, pattern, tx = _tx_frame(ctx, pt, trial)
        rx = add_awgn(
            bpsk_modulate(tx), pt.noise_var,
            stream(seed, TAG_NOISE, point=pt.index, trial=trial),
        )
        chan = deinterleave(depuncture(bpsk_llr(rx, pt.noise_var), pattern), ctx.perm)
        res = decode_spa(
            chan, ctx.code, max_iters=ctx.ldpc_iters,
            variant=ctx.variant, nms_alpha=ctx.nms_alpha,
        )
        _score(acc, info, cw, res.hard_bits, sys_cols, res.iterations_used, 1)
    return acc


def _siso_sub_batch(trellis) -> int:
    """Frames per demodulator call, sized to keep the state lattice modest."""
    cfg = trellis.cfg
    per_frame = trellis.n_states * 1200  # rough forward-lattice doubles
    return max(1, (8 << 20) // per_frame)


def _chunk_cpm(ctx: RunContext, pt: PointSpec, trial_lo: int, n: int) -> Accum:
    acc = Accum()
    sim = ctx.sim
    code, perm, trellis = ctx.code, ctx.perm, ctx.trellis
    asm_len = ctx.frame_cfg.asm_len
    n_surv, n_pad = pt.n_surv, pt.n_pad
    frame_bits = asm_len + n_surv + n_pad
    sys_cols = code.systematic_cols
    asm_vec = asm_priors(ctx.frame_cfg)
    pad_vec = perfect_llrs(np.zeros(n_pad, dtype=np.uint8))

    infos = np.empty((n, code.k), dtype=np.uint8)
    cws = np.empty((n, code.n), dtype=np.uint8)
    patterns = []
    rx = np.empty((n, frame_bits // trellis.cfg.bits_per_symbol * trellis.cfg.sps),
                  dtype=np.complex128)
    for i, trial in enumerate(range(trial_lo, trial_lo + n)):
        info, cw, pattern, tx = _tx_frame(ctx, pt, trial)
        infos[i], cws[i] = info, cw
        patterns.append(pattern)
        bits = np.concatenate([
            ctx.frame_cfg.asm_bits, tx.astype(np.uint8),
            np.zeros(n_pad, dtype=np.uint8),
        ])
        clean = cpm_mod.modulate(bits, trellis.cfg)
        rx[i] = add_awgn(
            clean, pt.noise_var,
            stream(sim.seed, TAG_NOISE, point=pt.index, trial=trial),
        )

    # Punctured coded bits never reach the channel, so their soft values are
    # carried across global passes; observed positions are rebuilt from the
    # fresh demodulator extrinsic every pass.
    punct_cw = [(~p.keep_mask)[perm.forward] for p in patterns]
    prior = np.zeros((n, frame_bits))
    soft = np.zeros((n, code.n))
    hard = np.zeros((n, code.n), dtype=np.uint8)
    g_used = np.full(n, sim.global_iters, dtype=np.int64)
    local_iters = np.zeros(n, dtype=np.int64)
    active = list(range(n))
    sub = _siso_sub_batch(trellis)

    for g in range(1, sim.global_iters + 1):
        ext = np.empty((len(active), frame_bits))
        for lo in range(0, len(active), sub):
            sel = active[lo:lo + sub]
            ext[lo:lo + len(sel)] = cpm_mod.siso_demodulate_batch(
                rx[sel], prior[sel], pt.noise_var, trellis, max_log=sim.max_log
            )
        still = []
        for row, fi in enumerate(active):
            payload_ext = ext[row, asm_len:asm_len + n_surv]
            x_in = deinterleave(depuncture(payload_ext, patterns[fi]), perm)
            x_in = x_in + soft[fi]
            res = decode_spa(
                x_in, code, max_iters=ctx.ldpc_iters,
                variant=ctx.variant, nms_alpha=ctx.nms_alpha,
            )
            local_iters[fi] += res.iterations_used
            hard[fi] = res.hard_bits
            if res.converged:
                g_used[fi] = g
                continue
            soft[fi] = np.where(punct_cw[fi], res.posterior, 0.0)
            if g < sim.global_iters:
                prior[fi, :asm_len] = asm_vec
                prior[fi, asm_len:asm_len + n_surv] = puncture(
                    interleave(res.extrinsic, perm), patterns[fi]
                )
                prior[fi, asm_len + n_surv:] = pad_vec
            still.append(fi)
        active = still
        if not active:
            break

    for i in range(n):
        _score(acc, infos[i], cws[i], hard[i], sys_cols,
               int(local_iters[i]), int(g_used[i]))
    return acc


def _run_chunk(ctx: RunContext, pt: PointSpec, trial_lo: int, n: int) -> Accum:
    if ctx.sim.mode == "cpm":
        return _chunk_cpm(ctx, pt, trial_lo, n)
    return _chunk_no_cpm(ctx, pt, trial_lo, n)


# worker-side context, inherited through fork
_WORKER_CTX: RunContext | None = None


def _pool_entry(args):
    pt, trial_lo, n = args
    return _run_chunk(_WORKER_CTX, pt, trial_lo, n)


def _chunk_sizes(total: int, parts: int):
    base, rem = divmod(total, parts)
    return [s for s in ([base + 1] * rem + [base] * (parts - rem)) if s > 0]


@dataclass
class PointResult:
    spec: PointSpec
    acc: Accum
    wall_clock_s: float = 0.0


def run_point(ctx: RunContext, pt: PointSpec, pool=None) -> PointResult:
    sim = ctx.sim
    total = Accum()
    t0 = time.perf_counter()
    done = 0
    while True:
        round_n = min(sim.batch_frames, sim.max_frames - done)
        if round_n <= 0:
            break
        if pool is None:
            total.merge(_run_chunk(ctx, pt, done, round_n))
        else:
            tasks = []
            lo = done
            for size in _chunk_sizes(round_n, sim.workers):
                tasks.append((pt, lo, size))
                lo += size
            for part in pool.map(_pool_entry, tasks):
                total.merge(part)
        done += round_n
        if sim.min_frame_errors > 0 and total.frame_errors >= sim.min_frame_errors:
            break
        if done >= sim.max_frames:
            break
    return PointResult(spec=pt, acc=total, wall_clock_s=time.perf_counter() - t0)


def enumerate_points(ctx: RunContext):
    deltas = parse_delta_list(ctx.sim.delta)
    snrs = parse_snr_list(ctx.sim.ebn0)
    points = []
    index = 0
    for echo, delta in deltas:
        for ebn0 in snrs:
            points.append(make_point(ctx, index, echo, delta, ebn0))
            index += 1
    return points


def run_sweep(sim: SimConfig, progress=None):
    """Execute the whole sweep; returns a list of PointResult in CSV order."""
    ctx = build_context(sim)
    points = enumerate_points(ctx)
    results = []
    global _WORKER_CTX
    pool = None
    mp_ctx = None
    if sim.workers > 1:
        mp_ctx = multiprocessing.get_context("fork")
        _WORKER_CTX = ctx
        pool = mp_ctx.Pool(sim.workers)
    try:
        for pt in points:
            res = run_point(ctx, pt, pool=pool)
            results.append(res)
            if progress is not None:
                progress(ctx, res)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
            _WORKER_CTX = None
    return ctx, results


# ---------------------------------------------------------------------------
# output


CSV_HEADER = (
    "mode,code,delta_pct,rate_native,rate_punctured,ebn0_db,esn0_db,frames,"
    "bit_errors,frame_errors,ber,fer,mean_global_iters,mean_local_iters,seed"
)


def csv_row(ctx: RunContext, res: PointResult) -> str:
    sim, code = ctx.sim, ctx.code
    pt, acc = res.spec, res.acc
    rate_native = code.k / code.n
    # nominal post-puncturing rate R/(1 - delta/100); the realized rate
    # K/(N - n_punctured) differs by the integer rounding of the pattern
    # size and is what the Es/N0 column is derived from (see sidecar)
    rate_punct = rate_native / (1.0 - float(pt.delta) / 100.0)
    ber = acc.bit_errors / (acc.frames * code.k) if acc.frames else 0.0
    fer = acc.frame_errors / acc.frames if acc.frames else 0.0
    mean_g = acc.sum_global_iters / acc.frames if acc.frames else 0.0
    mean_l = acc.sum_local_iters / acc.frames if acc.frames else 0.0
    return (
        f"{sim.mode},{sim.code},{pt.delta_echo},{rate_native:.6f},"
        f"{rate_punct:.6f},{pt.ebn0_db:g},{pt.esn0_db:.6f},{acc.frames:d},"
        f"{acc.bit_errors:d},{acc.frame_errors:d},{ber:.6e},{fer:.6e},"
        f"{mean_g:.4f},{mean_l:.4f},{sim.seed:d}"
    )


def write_csv(path: str, ctx: RunContext, results) -> None:
    lines = [CSV_HEADER]
    lines.extend(csv_row(ctx, res) for res in results)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def sidecar_path(csv_path: str) -> str:
    root, ext = os.path.splitext(csv_path)
    return (root if ext.lower() == ".csv" else csv_path) + ".json"


def write_sidecar(path: str, ctx: RunContext, results) -> None:
    """Run metadata and counters that do not fit the fixed CSV schema."""
    sim, code = ctx.sim, ctx.code
    doc = {
        "config": {f.name: getattr(sim, f.name) for f in fields(SimConfig)},
        "resolved": {
            "code_n": code.n,
            "code_k": code.k,
            "rate_exact": str(code.rate),
            "rate_nominal": str(code.nominal_rate),
            "ldpc_iters": ctx.ldpc_iters,
            "decoder_variant": ctx.variant,
            "interleaver": [int(v) for v in ctx.perm.forward],
            "asm_hex": ctx.frame_cfg.asm_hex,
            "asm_len": ctx.frame_cfg.asm_len,
        },
        "points": [],
    }
    if sim.mode == "cpm":
        cfg = ctx.trellis.cfg
        doc["resolved"]["cpm"] = {
            "preset": sim.cpm,
            "alphabet": cfg.q,
            "h_num": list(cfg.h_num),
            "h_den": cfg.p,
            "pulse": cfg.pulse,
            "span": cfg.span,
            "sps": cfg.sps,
            "bit_map": cfg.bit_map,
            "n_states": ctx.trellis.n_states,
        }
    for res in results:
        pt, acc = res.spec, res.acc
        doc["points"].append({
            "delta_pct": pt.delta_echo,
            "ebn0_db": pt.ebn0_db,
            "esn0_db": pt.esn0_db,
            "effective_rate": pt.effective_rate,
            "noise_var": pt.noise_var,
            "n_punctured": pt.n_punct,
            "pad_bits": pt.n_pad,
            "pattern": None if pt.pattern is None
            else [int(v) for v in pt.pattern.indices],
            "frames": acc.frames,
            "bit_errors": acc.bit_errors,
            "coded_bit_errors": acc.coded_bit_errors,
            "frame_errors": acc.frame_errors,
            "bit_errors_sq_sum": acc.bit_errors_sq,
            "wall_clock_s": round(res.wall_clock_s, 3),
        })
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
