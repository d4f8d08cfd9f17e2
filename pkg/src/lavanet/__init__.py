"""Reservoir computing on a deterministic multi-core neuromorphic simulator."""

from .experiment import Experiment
from .params import ParameterSet, defaults, derive, merge, validate

__all__ = ["Experiment", "ParameterSet", "defaults", "derive", "merge", "validate"]
__version__ = "0.1.0"
