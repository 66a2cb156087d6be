"""Numerical check that perfect quantum self-replication would allow signalling."""

__version__ = "0.1.0"

from .errors import NoGoSigError
from .replication_maps import (
    LinearMapSpec,
    SignallingReport,
    Verdict,
    no_cloning_gap,
    perfect_replication_map,
    signalling_gap,
)
from .scenario_states import ConstructorConfig, ControlPolicy, ControlStates, OverlapParameters

__all__ = [
    "ConstructorConfig", "ControlPolicy", "ControlStates", "LinearMapSpec", "NoGoSigError",
    "OverlapParameters", "SignallingReport", "Verdict", "__version__", "no_cloning_gap",
    "perfect_replication_map", "signalling_gap",
]
