"""Numerical laboratory for qubit coherence-cloning machines."""
from .errors import (
    CoherenceLabError,
    ContractError,
    DimensionError,
    InnerProductError,
    InvalidMachineError,
    InvalidStateError,
    NormalizationError,
)
from .qcore import CoherenceMeasure, coherence, partial_trace, tensor, complete_unitary, haar_random_pure
from .cloners import (
    CloneReport,
    CloningMachine,
    KnownPair,
    Variant,
    apply,
    build_bh,
    build_generic,
    build_machineless,
    build_max_cloner,
    build_wz,
    input_coherence,
)

__version__ = "0.1.0"

__all__ = [
    "CoherenceLabError",
    "ContractError",
    "DimensionError",
    "InnerProductError",
    "InvalidMachineError",
    "InvalidStateError",
    "NormalizationError",
    "CoherenceMeasure",
    "coherence",
    "partial_trace",
    "tensor",
    "complete_unitary",
    "haar_random_pure",
    "CloneReport",
    "CloningMachine",
    "KnownPair",
    "Variant",
    "apply",
    "build_bh",
    "build_generic",
    "build_machineless",
    "build_max_cloner",
    "build_wz",
    "input_coherence",
]
