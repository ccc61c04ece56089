"""Independent reference implementations used to freeze expected values.

Everything here is written against the definitions, not against the
package internals: plain dense GF(2) elimination, exhaustive codeword
enumeration, numerically integrated CPM phase, and brute-force path sums.
Slow on purpose; only run on tiny inputs.
"""

import math

import numpy as np


def dense_rank_gf2(dense) -> int:
    """Row-echelon rank over GF(2) on a dense 0/1 matrix."""
    a = np.array(dense, dtype=np.uint8) % 2
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if a[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def enumerate_codewords(h_dense) -> np.ndarray:
    """All x with H x = 0, by exhaustive search. Only for small n."""
    h = np.array(h_dense, dtype=np.uint8) % 2
    n = h.shape[1]
    if n > 20:
        raise ValueError("enumeration oracle limited to n <= 20")
    words = []
    for v in range(1 << n):
        x = np.array([(v >> i) & 1 for i in range(n)], dtype=np.uint8)
        if not (h @ x % 2).any():
            words.append(x)
    return np.array(words, dtype=np.uint8)


def logsumexp(values) -> float:
    m = max(values)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(v - m) for v in values))


def map_bit_marginals(input_llrs, codewords) -> np.ndarray:
    """Exact per-bit posterior LLRs under a uniform prior over codewords.

    Codeword weight uses the same convention as the decoders: an input LLR
    lam contributes +lam/2 when the codeword bit is 0 and -lam/2 when 1.
    """
    llrs = np.asarray(input_llrs, dtype=np.float64)
    scores = [float(np.sum(0.5 * llrs * (1.0 - 2.0 * cw))) for cw in codewords]
    n = len(llrs)
    out = np.empty(n)
    for j in range(n):
        s0 = [s for s, cw in zip(scores, codewords) if cw[j] == 0]
        s1 = [s for s, cw in zip(scores, codewords) if cw[j] == 1]
        out[j] = logsumexp(s0) - logsumexp(s1)
    return out


def q_func(x: float) -> float:
    """Gaussian tail probability."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# CPM references


def _gray_word(idx: int) -> int:
    return idx ^ (idx >> 1)


def oracle_bits_to_symbols(bits, q: int, bit_map: str) -> list:
    m = q.bit_length() - 1
    bits = list(int(b) for b in bits)
    assert len(bits) % m == 0
    inverse = {}
    for idx in range(q):
        word = _gray_word(idx) if bit_map == "gray" else idx
        inverse[word] = idx
    out = []
    for k in range(0, len(bits), m):
        word = 0
        for b in bits[k:k + m]:
            word = (word << 1) | b
        out.append(inverse[word])
    return out


def oracle_precode(bits) -> list:
    prev = 0
    out = []
    for b in bits:
        out.append(int(b) ^ prev)
        prev = int(b)
    return out


def oracle_modulate(bits, cfg, refine: int = 64) -> np.ndarray:
    """CPM samples via numerical integration of the frequency pulse.

    The phase pulse is built by composite-Simpson integration of the
    frequency pulse over its support (where it is continuous), on a grid
    refine times finer than the sample grid; the closed-form phase pulse
    is never used. Per-symbol contributions are then superposed, so the
    frequency jumps at symbol boundaries never sit inside an integration
    panel.
    """
    if refine % 2:
        raise ValueError("refine must be even for Simpson weights")
    bits = list(int(b) for b in bits)
    if cfg.precode:
        bits = oracle_precode(bits)
    symbols = oracle_bits_to_symbols(bits, cfg.q, cfg.bit_map)
    T = len(symbols)
    L, p, sps = cfg.span, cfg.p, cfg.sps
    nums = list(cfg.h_num)
    n_h = len(nums)

    def freq_pulse(tau: float) -> float:
        # only evaluated inside [0, L]
        if cfg.pulse == "rec":
            return 1.0 / (2.0 * L)
        return (1.0 - math.cos(2.0 * math.pi * tau / L)) / (2.0 * L)

    # cumulative pulse integral at every coarse sample offset in [0, L]
    h_step = 1.0 / (sps * refine)
    q_at = [0.0] * (L * sps + 1)
    acc = 0.0
    for c in range(L * sps):
        seg = 0.0
        for j in range(0, refine, 2):
            t0 = (c * refine + j) * h_step
            seg += (freq_pulse(t0) + 4.0 * freq_pulse(t0 + h_step)
                    + freq_pulse(t0 + 2.0 * h_step))
        acc += seg * h_step / 3.0
        q_at[c + 1] = acc

    def q_lookup(step_index: int) -> float:
        # integrated pulse at tau = step_index / sps
        if step_index <= 0:
            return 0.0
        if step_index >= L * sps:
            return q_at[L * sps]
        return q_at[step_index]

    n_coarse = T * sps
    theta = np.zeros(n_coarse)
    for j in range(n_coarse):
        tot = 0.0
        for i in range(-(L - 1), T):
            # virtual index-0 symbols fill the correlative window before t=0
            a = (2 * symbols[i] - (cfg.q - 1)) if i >= 0 else -(cfg.q - 1)
            tot += (nums[i % n_h] / p) * a * q_lookup(j - i * sps)
        theta[j] = 2.0 * math.pi * tot
    return np.exp(1j * theta)


def cpm_path_posteriors(rx, priors, noise_var, cfg, modulate_fn) -> np.ndarray:
    """Exact bit posteriors by summing over every information sequence.

    modulate_fn(bits, cfg) supplies the candidate waveforms; the metric is
    the AWGN log-likelihood plus the prior weight, matching the SISO's
    branch metric up to bit-independent constants.
    """
    rx = np.asarray(rx, dtype=np.complex128)
    priors = np.asarray(priors, dtype=np.float64)
    n_bits = len(priors)
    if n_bits > 16:
        raise ValueError("path-sum oracle limited to 16 bits")
    scores = []
    patterns = []
    for v in range(1 << n_bits):
        bits = np.array([(v >> (n_bits - 1 - j)) & 1 for j in range(n_bits)],
                        dtype=np.uint8)
        s = modulate_fn(bits, cfg)
        loglik = -float(np.sum(np.abs(rx - s) ** 2)) / (2.0 * noise_var)
        loglik += float(np.sum(0.5 * priors * (1.0 - 2.0 * bits)))
        scores.append(loglik)
        patterns.append(bits)
    out = np.empty(n_bits)
    for j in range(n_bits):
        s0 = [s for s, b in zip(scores, patterns) if b[j] == 0]
        s1 = [s for s, b in zip(scores, patterns) if b[j] == 1]
        out[j] = logsumexp(s0) - logsumexp(s1)
    return out
