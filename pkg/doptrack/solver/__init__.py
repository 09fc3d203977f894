from .measurements import MeasurementSet, simulate_measurements
from .objective import jacobian, normal_equations, objective, residuals
from .lm import SolveResult, SolverConfig, StartResult, dead_reckoning, solve

__all__ = [
    "MeasurementSet",
    "SolverConfig",
    "SolveResult",
    "StartResult",
    "simulate_measurements",
    "residuals",
    "objective",
    "jacobian",
    "normal_equations",
    "dead_reckoning",
    "solve",
]
