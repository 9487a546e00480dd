"""Generators for every flag circuit family, each paired with its table.

Emissions are pure functions of their arguments (searches take explicit
seeds) and each one re-verifies itself at generation time: a circuit
that fails its own fault-injection check is never returned.
"""

from .common import (
    BoundViolated,
    CircuitBuilder,
    InconsistentTable,
    NoKnownSequence,
    NotPowerOfTwo,
    UnknownMethod,
    UnsupportedWeight,
)
from .catprep import adaptive_bound, cat_prep, error_detect_bound, flag_ec_bound
from .d3 import slow_reset_bound, stab_meas_d3_fast, stab_meas_d3_slow, x_weight_code
from .d57 import stab_meas_d5, stab_meas_d7

__all__ = [
    "BoundViolated",
    "CircuitBuilder",
    "InconsistentTable",
    "NoKnownSequence",
    "NotPowerOfTwo",
    "UnknownMethod",
    "UnsupportedWeight",
    "adaptive_bound",
    "cat_prep",
    "error_detect_bound",
    "flag_ec_bound",
    "slow_reset_bound",
    "stab_meas_d3_fast",
    "stab_meas_d3_slow",
    "stab_meas_d5",
    "stab_meas_d7",
    "x_weight_code",
]
