"""Flag fault tolerance toolkit.

Constructs flag-based circuits for stabilizer measurement and state
preparation, verifies their fault tolerance by exhaustive or sampled fault
injection, and simulates error correction of small CSS codes under
circuit-level noise.
"""

from flagforge.pauli import (
    PauliOperator,
    Location,
    Segment,
    CliffordCircuit,
    FaultEvent,
    propagate,
    conjugate_through,
    enumerate_fault_sets,
    count_fault_sets,
)
from flagforge.flagseq import gray_code, weight2_path, validate_sequence
from flagforge.codes import (
    StabilizerCode,
    MeasurementSequence,
    SymplecticMap,
    LogicalAction,
    make_code,
    reduce_weight,
    check_distance,
    verify_logical_action,
)
from flagforge.tables import Action, CorrectionTable

__all__ = [
    "PauliOperator",
    "Location",
    "Segment",
    "CliffordCircuit",
    "FaultEvent",
    "propagate",
    "conjugate_through",
    "enumerate_fault_sets",
    "count_fault_sets",
    "gray_code",
    "weight2_path",
    "validate_sequence",
    "StabilizerCode",
    "MeasurementSequence",
    "SymplecticMap",
    "LogicalAction",
    "make_code",
    "reduce_weight",
    "check_distance",
    "verify_logical_action",
    "Action",
    "CorrectionTable",
]

__version__ = "0.1.0"
