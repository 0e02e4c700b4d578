"""Dissipation-driven two-mode squeezing of two mechanical oscillators."""

from .analytics import AnalyticPrediction, predict
from .dynamics import CouplingProfile, DriveSpec, SystemParams, evolve, steady_state
from .errors import (
    ConditionError,
    ConfigError,
    IntegrationError,
    InvalidState,
    NoSolutionError,
    NotSymplecticError,
    OptoSqueezeError,
    StabilityError,
    TruncationError,
)
from .gaussian import GaussianState, SqueezingParams, epr_min
from .protocols import TwoStepSchedule, run_setup1, run_setup1_full, run_setup2, sweep

__all__ = [
    "AnalyticPrediction", "ConditionError", "ConfigError", "CouplingProfile", "DriveSpec",
    "GaussianState", "IntegrationError", "InvalidState", "NoSolutionError", "NotSymplecticError",
    "OptoSqueezeError", "SqueezingParams", "StabilityError", "SystemParams", "TruncationError",
    "TwoStepSchedule", "epr_min", "evolve", "predict", "run_setup1", "run_setup1_full",
    "run_setup2", "steady_state", "sweep",
]
