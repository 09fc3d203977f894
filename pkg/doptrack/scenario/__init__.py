from .geometry import (
    ScenarioGeometry,
    bistatic_doppler,
    bistatic_excess_range,
    doppler_matrices,
    doppler_matrix,
    position_gradients,
)
from .motion import MotionParams, Trajectory, forward_doppler, propagate
from .shapes import motion_from_waypoints, shape_motion

__all__ = [
    "ScenarioGeometry",
    "MotionParams",
    "Trajectory",
    "propagate",
    "bistatic_doppler",
    "bistatic_excess_range",
    "doppler_matrix",
    "doppler_matrices",
    "position_gradients",
    "forward_doppler",
    "motion_from_waypoints",
    "shape_motion",
]
