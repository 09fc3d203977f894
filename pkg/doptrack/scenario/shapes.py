from typing import Literal, Sequence

import numpy as np

from .motion import MotionParams

ShapeName = Literal["V", "L", "U"]

# Unit outlines, traversed in order.
OUTLINES = {
    "V": [(-1.0, 1.0), (0.0, -1.0), (1.0, 1.0)],
    "L": [(-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)],
    "U": [(-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (1.0, 1.0)],
}


def cut_corners(points: np.ndarray, iterations: int = 3) -> np.ndarray:
    """Round polyline corners by Chaikin corner cutting, keeping both endpoints."""
    points = np.asarray(points, dtype=float)
    for _ in range(iterations):
        if len(points) < 3:
            break
        a, b = points[:-1], points[1:]
        q = 0.75 * a + 0.25 * b
        r = 0.25 * a + 0.75 * b
        inner = np.empty((2 * len(a), 2))
        inner[0::2], inner[1::2] = q, r
        points = np.vstack([points[0], inner[1:-1], points[-1]])
    return points


def path_length(points: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.diff(points, axis=0), axis=1)))


def sample_path(points: np.ndarray, distances: np.ndarray) -> np.ndarray:
    """Points at the given arc lengths along a polyline."""
    cumulative = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(points, axis=0), axis=1))])
    x = np.interp(distances, cumulative, points[:, 0])
    y = np.interp(distances, cumulative, points[:, 1])
    return np.column_stack([x, y])


def motion_from_waypoints(
    waypoints: Sequence[Sequence[float]],
    speed: float,
    num_instants: int,
    step: float,
    corner_iterations: int = 3,
) -> MotionParams:
    """
    Fly a waypoint polyline at constant speed.

    Corners are rounded first, then the path is sampled every ``speed·step``
    meters. Velocities are the finite differences of consecutive samples, so
    :func:`propagate` reproduces the sampled path.
    """
    if speed <= 0:
        raise ValueError(f"speed must be positive, got {speed}")
    path = cut_corners(np.asarray(waypoints, dtype=float), corner_iterations)
    needed = speed * step * num_instants
    if path_length(path) < needed - 1e-9:
        raise ValueError(
            f"path is {path_length(path):.2f} m long but the flight needs {needed:.2f} m"
        )
    samples = sample_path(path, np.arange(num_instants + 1) * speed * step)
    velocities = np.diff(samples, axis=0) / step
    return MotionParams(samples[0], velocities, step)


def shape_motion(
    shape: ShapeName,
    speed: float,
    num_instants: int,
    step: float,
    center: Sequence[float] = (0.0, 0.0),
    heading: float = 0.0,
    corner_iterations: int = 3,
) -> MotionParams:
    """
    Parametric V, L or U flight sized so the whole path is flown exactly once.

    Parameters
    ----------
    shape : {"V", "L", "U"}

    speed : float
        Ground speed in m/s.

    num_instants : int
        Number of detection instants K.

    step : float
        Detection interval T_d in seconds.

    center : (x, y)
        Center of the outline in meters.

    heading : float
        Counter-clockwise rotation of the outline in degrees.
    """
    outline = cut_corners(np.asarray(OUTLINES[shape]), corner_iterations)
    scale = speed * step * num_instants / path_length(outline)

    angle = np.deg2rad(heading)
    rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    waypoints = outline * scale @ rotation.T + np.asarray(center, dtype=float)

    # Already rounded above.
    return motion_from_waypoints(waypoints, speed, num_instants, step, corner_iterations=0)
