import numpy as np
import pytest

from punclink.framing import (
    DEFAULT_ASM_BITS,
    DEFAULT_ASM_HEX,
    FrameConfig,
    asm_bits_from_hex,
    asm_priors,
    attach_asm,
    split_frame,
)
from punclink.llr import LLR_MAX


def test_default_marker_bits_msb_first():
    bits = asm_bits_from_hex(DEFAULT_ASM_HEX, DEFAULT_ASM_BITS)
    assert len(bits) == 64
    # 0x0 -> 0000, 0x3 -> 0011 open the pattern
    assert bits[:8].tolist() == [0, 0, 0, 0, 0, 0, 1, 1]
    # 0xB0 closes it
    assert bits[-8:].tolist() == [1, 0, 1, 1, 0, 0, 0, 0]
    value = int("".join(map(str, bits.tolist())), 2)
    assert value == int(DEFAULT_ASM_HEX, 16)


def test_asm_hex_width_guard():
    with pytest.raises(ValueError):
        asm_bits_from_hex("034776C7272895B0", 60)
    with pytest.raises(ValueError):
        asm_bits_from_hex("0347", 64)
    with pytest.raises(ValueError):
        asm_bits_from_hex("ZZ", 8)
    with pytest.raises(ValueError):
        asm_bits_from_hex("AB", 0)


def test_zero_length_asm():
    cfg = FrameConfig(asm_hex="", asm_len=0)
    payload = np.array([1, 0, 1], dtype=np.uint8)
    frame = attach_asm(payload, cfg)
    assert np.array_equal(frame, payload)
    head, tail = split_frame(np.array([0.5, -1.0, 2.0]), cfg)
    assert head.size == 0 and tail.tolist() == [0.5, -1.0, 2.0]
    assert asm_priors(cfg).size == 0


def test_attach_split_round_trip():
    cfg = FrameConfig()
    rng = np.random.default_rng(3)
    payload = rng.integers(0, 2, 100, dtype=np.uint8)
    frame = attach_asm(payload, cfg)
    assert len(frame) == 164
    assert np.array_equal(frame[:64], cfg.asm_bits)
    assert np.array_equal(frame[64:], payload)
    llrs = rng.normal(size=164)
    head, tail = split_frame(llrs, cfg)
    assert np.array_equal(head, llrs[:64])
    assert np.array_equal(tail, llrs[64:])


def test_split_frame_batch_axis():
    cfg = FrameConfig()
    llrs = np.random.default_rng(4).normal(size=(3, 200))
    head, tail = split_frame(llrs, cfg)
    assert head.shape == (3, 64)
    assert tail.shape == (3, 136)


def test_split_frame_too_short():
    cfg = FrameConfig()
    with pytest.raises(ValueError):
        split_frame(np.zeros(63), cfg)


def test_asm_priors_saturated():
    cfg = FrameConfig()
    priors = asm_priors(cfg)
    assert priors.shape == (64,)
    # bit 0 -> +LLR_MAX, bit 1 -> -LLR_MAX
    assert np.array_equal(priors, np.where(cfg.asm_bits == 0, LLR_MAX, -LLR_MAX))
    assert set(np.abs(priors)) == {LLR_MAX}


def test_custom_marker():
    cfg = FrameConfig(asm_hex="FF00", asm_len=16)
    assert cfg.asm_bits.tolist() == [1] * 8 + [0] * 8
