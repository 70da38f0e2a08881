"""Kautz-Singleton group testing: construction, decoding and Monte Carlo evaluation."""

from .decoders import (DecoderConfig, comp_decode, comp_decode_restricted, default_tau,
                       ncomp_decode)
from .designs import (TestMatrix, bernoulli_build, ks_build, ncc_build, read_matrix, stack,
                      write_matrix)
from .gf import PrimeField, field_new, smallest_prime_at_least
from .recursive import build_scheme, decode_scheme, predicted_tests
from .rscode import GTParams, RSCode, encode, index_to_message, select_params
from .sim import TrialConfig, measure, run_trials, sample_defective_set, sweep

__version__ = "0.1.0"

__all__ = [
    "DecoderConfig", "GTParams", "PrimeField", "RSCode", "TestMatrix", "TrialConfig",
    "bernoulli_build", "build_scheme", "comp_decode", "comp_decode_restricted",
    "decode_scheme", "default_tau", "encode", "field_new", "index_to_message", "ks_build",
    "measure", "ncc_build", "ncomp_decode", "predicted_tests", "read_matrix", "run_trials",
    "sample_defective_set", "select_params", "smallest_prime_at_least", "stack", "sweep",
    "write_matrix",
]
