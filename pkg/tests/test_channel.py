import math

import numpy as np
import pytest

from punclink.channel import (
    SnrPoint,
    add_awgn,
    bpsk_llr,
    bpsk_modulate,
    bpsk_theory_ber,
    ebn0_to_noise_var,
)
from punclink.llr import LLR_MAX, clamp, hard_decisions
from punclink.rng import TAG_NOISE, stream

from oracles import q_func


def test_noise_var_reference_point():
    # rate-1 BPSK at 0 dB: N0/2 = 0.5
    assert ebn0_to_noise_var(0.0, 1.0) == pytest.approx(0.5)
    assert ebn0_to_noise_var(3.0103, 1.0) == pytest.approx(0.25, rel=1e-4)
    # halving the rate doubles the noise for the same Eb/N0
    assert ebn0_to_noise_var(0.0, 0.5) == pytest.approx(1.0)
    # symbol energy scales linearly
    assert ebn0_to_noise_var(0.0, 1.0, energy_per_symbol=8.0) == pytest.approx(4.0)


def test_noise_var_guards():
    with pytest.raises(ValueError):
        ebn0_to_noise_var(0.0, 0.0)
    with pytest.raises(ValueError):
        ebn0_to_noise_var(0.0, 1.0, energy_per_symbol=0.0)


def test_snr_point_round_trip():
    p = SnrPoint.from_ebn0(4.0, 2 / 3)
    assert p.esn0_db == pytest.approx(4.0 + 10 * math.log10(2 / 3))
    q = SnrPoint.from_esn0(p.esn0_db, 2 / 3)
    assert q.ebn0_db == pytest.approx(4.0)
    assert SnrPoint.from_ebn0(0.0, 1.0).esn0_db == pytest.approx(0.0)


def test_bpsk_mapping():
    assert bpsk_modulate(np.array([0, 1, 0])).tolist() == [1.0, -1.0, 1.0]


def test_awgn_zero_variance_copy():
    x = np.arange(5, dtype=np.float64)
    y = add_awgn(x, 0.0, stream(1, TAG_NOISE))
    assert np.array_equal(y, x)
    assert y is not x
    with pytest.raises(ValueError):
        add_awgn(x, -1.0, stream(1, TAG_NOISE))


def test_awgn_statistics_real():
    rng = stream(123, TAG_NOISE)
    n = 200_000
    y = add_awgn(np.zeros(n), 0.25, rng)
    assert abs(y.mean()) < 4 * 0.5 / math.sqrt(n)
    assert y.var() == pytest.approx(0.25, rel=0.02)


def test_awgn_statistics_complex():
    rng = stream(124, TAG_NOISE)
    n = 200_000
    y = add_awgn(np.zeros(n, dtype=np.complex128), 0.5, rng)
    assert y.real.var() == pytest.approx(0.5, rel=0.02)
    assert y.imag.var() == pytest.approx(0.5, rel=0.02)
    # I and Q independent
    assert abs(np.mean(y.real * y.imag)) < 4 * 0.5 / math.sqrt(n)


def test_awgn_deterministic_by_stream():
    a = add_awgn(np.zeros(16), 1.0, stream(9, TAG_NOISE, point=2, trial=5))
    b = add_awgn(np.zeros(16), 1.0, stream(9, TAG_NOISE, point=2, trial=5))
    c = add_awgn(np.zeros(16), 1.0, stream(9, TAG_NOISE, point=2, trial=6))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_llr_sign_and_scale():
    # noiseless bit 0 at noise_var sigma2: LLR = +2/sigma2
    assert bpsk_llr(np.array([1.0]), 0.5)[0] == pytest.approx(4.0)
    assert bpsk_llr(np.array([-1.0]), 0.5)[0] == pytest.approx(-4.0)
    sym = bpsk_llr(np.array([0.3, -0.3]), 0.7)
    assert sym[0] == pytest.approx(-sym[1])
    with pytest.raises(ValueError):
        bpsk_llr(np.array([1.0]), 0.0)


def test_llr_clamped():
    out = bpsk_llr(np.array([1e9, -1e9]), 0.5)
    assert out.tolist() == [LLR_MAX, -LLR_MAX]
    assert clamp(np.array([1e4]))[0] == LLR_MAX


def test_hard_decisions():
    assert hard_decisions(np.array([3.0, -0.1, 0.0])).tolist() == [0, 1, 0]


def test_theory_matches_q_function():
    for db in (0.0, 2.0, 4.0, 6.0, 9.6):
        lin = 10.0 ** (db / 10.0)
        assert bpsk_theory_ber(db) == pytest.approx(q_func(math.sqrt(2 * lin)), rel=1e-12)


def test_uncoded_bpsk_monte_carlo():
    """Simulated BER within 3 sigma of theory at a few points."""
    n = 400_000
    for db, seed in ((0.0, 31), (2.0, 32), (4.0, 33)):
        rng_bits = stream(seed, TAG_NOISE, point=0)
        bits = rng_bits.integers(0, 2, n, dtype=np.uint8)
        nv = ebn0_to_noise_var(db, 1.0)
        rx = add_awgn(bpsk_modulate(bits), nv, stream(seed, TAG_NOISE, point=1))
        errs = int((hard_decisions(bpsk_llr(rx, nv)) != bits).sum())
        p = bpsk_theory_ber(db)
        assert abs(errs - n * p) < 3 * math.sqrt(n * p * (1 - p)), db
