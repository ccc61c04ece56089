"""punclink: rate-matched LDPC link with an optional CPM inner modem.

The package simulates a coded telemetry-style link in two flavors: a
BPSK/AWGN reference chain and a serially concatenated chain where LDPC
codewords are interleaved, randomly punctured for rate matching, framed
behind a known attached sync marker and carried by continuous-phase
modulation. The CPM receiver and the LDPC decoder exchange extrinsic
information over several global passes; punctured bits enter the decoder
as erasures and are recovered by the code.
"""

from .channel import SnrPoint, add_awgn, bpsk_llr, bpsk_modulate, bpsk_theory_ber, ebn0_to_noise_var
from .codes import (
    REGISTRY_NAMES,
    AlistError,
    CirculantTable,
    LdpcCode,
    ParityCheckMatrix,
    alist_digest,
    build_standard_code,
    emit_alist,
    encode,
    expand_circulants,
    load_alist_code,
    parse_alist,
)
from .cpm import CpmConfig, build_trellis, make_cpm_config, modulate, preset, siso_demodulate
from .decoder import DecodeResult, decode_spa, syndrome
from .framing import DEFAULT_ASM_BITS, DEFAULT_ASM_HEX, FrameConfig, asm_priors, attach_asm, split_frame
from .harness import ConfigError, SimConfig, load_config, run_sweep, write_csv, write_sidecar
from .llr import LLR_MAX, clamp, hard_decisions, perfect_llrs
from .puncturing import (
    InterleaverPermutation,
    PuncturePattern,
    RatePair,
    deinterleave,
    depuncture,
    interleave,
    make_permutation,
    n_punctured,
    punctured_rate,
    puncture,
    required_overhead,
    sample_pattern,
)

__version__ = "0.1.0"
