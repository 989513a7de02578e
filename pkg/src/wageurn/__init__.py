"""Wage-extended Polya urn: simulation, mean-field dynamics, calibration and inequality statistics."""

from .engine import SimulationSchedule, SimulationTrace, ensemble_run, make_rng, run
from .model import FeedbackSpec, ModelParams, WealthState, field_G, make_params

__version__ = "0.1.0"

__all__ = [
    "FeedbackSpec",
    "ModelParams",
    "WealthState",
    "field_G",
    "make_params",
    "SimulationSchedule",
    "SimulationTrace",
    "ensemble_run",
    "make_rng",
    "run",
]
