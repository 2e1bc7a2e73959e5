"""Macroscopic-superposition index analysis for adiabatic quantum algorithms."""

from .errors import CapabilityError, NumericError, StepSizeError
from .qstate import PauliAxis, PureState
from .vcm import AdditiveObservable, ScalingSeries, Vcm, build_vcm, max_eigenpair

__all__ = [
    "AdditiveObservable",
    "CapabilityError",
    "NumericError",
    "PauliAxis",
    "PureState",
    "ScalingSeries",
    "StepSizeError",
    "Vcm",
    "build_vcm",
    "max_eigenpair",
]
__version__ = "0.1.0"
