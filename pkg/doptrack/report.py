import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from doptrack.errors import LengthMismatchError
from doptrack.scenario import MotionParams, Trajectory, propagate
from doptrack.utils import csvio

TRAJECTORY_COLUMNS = ["k", "t", "x", "y", "vx", "vy"]
POSITION_COLUMNS = ["t", "x", "y"]


@dataclass(frozen=True)
class ErrorReport:
    """Position errors of a reconstruction against the truth, in meters."""

    errors: np.ndarray
    p50: float
    p90: float
    max: float
    cdf_x: np.ndarray
    cdf_p: np.ndarray
    doppler_rmse: Optional[List[float]] = None
    extras: Dict[str, List[float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        def clean(values):
            return [float(v) if np.isfinite(v) else None for v in values]

        report = {
            "percentiles": {"p50": self.p50, "p90": self.p90, "max": self.max},
            "errors": clean(self.errors),
            "cdf": {"x": clean(self.cdf_x), "p": clean(self.cdf_p)},
        }
        if self.doppler_rmse is not None:
            report["doppler_rmse"] = clean(self.doppler_rmse)
        for name, values in self.extras.items():
            report[name] = clean(values)
        return report

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def empirical_cdf(errors: np.ndarray):
    """Sorted errors with cumulative probabilities, starting at probability 0."""
    x = np.sort(np.asarray(errors, dtype=float))
    p = np.arange(1, len(x) + 1) / len(x)
    return np.concatenate([x[:1], x]), np.concatenate([[0.0], p])


def score(reconstructed: Trajectory, truth: Trajectory) -> ErrorReport:
    """
    Per-instant Euclidean position errors and their distribution.

    Percentiles interpolate linearly between order statistics.

    Examples
    --------
    >>> truth = Trajectory([[0, 0], [1, 0]], 0.05)
    >>> score(Trajectory([[3, 4], [4, 4]], 0.05), truth).p90
    5.0
    """
    if len(reconstructed) != len(truth):
        raise LengthMismatchError(
            f"reconstruction has {len(reconstructed)} positions, truth has {len(truth)}"
        )
    if not np.isclose(reconstructed.step, truth.step):
        raise LengthMismatchError(
            f"reconstruction step {reconstructed.step} s differs from truth step {truth.step} s"
        )

    errors = np.linalg.norm(reconstructed.positions - truth.positions, axis=1)
    cdf_x, cdf_p = empirical_cdf(errors)
    return ErrorReport(
        errors=errors,
        p50=float(np.percentile(errors, 50)),
        p90=float(np.percentile(errors, 90)),
        max=float(errors.max()),
        cdf_x=cdf_x,
        cdf_p=cdf_p,
    )


def trajectory_frame(m: MotionParams) -> pd.DataFrame:
    positions = propagate(m).positions
    k = np.arange(m.num_instants)
    return pd.DataFrame(
        {
            "k": k,
            "t": k * m.step,
            "x": positions[:, 0],
            "y": positions[:, 1],
            "vx": m.velocities[:, 0],
            "vy": m.velocities[:, 1],
        }
    )[TRAJECTORY_COLUMNS]


def _read_frame(path: Union[str, Path], step: Optional[float]):
    df = csvio.read_csv(path)
    missing = set(POSITION_COLUMNS) - set(df.columns)
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    if step is None:
        if len(df) < 2:
            raise ValueError(f"{path}: cannot infer the step from a single row")
        step = float(df["t"].iloc[1] - df["t"].iloc[0])
    return df, step


def read_positions(path: Union[str, Path], step: Optional[float] = None) -> Trajectory:
    """Positions of a trajectory CSV, taken from its x and y columns."""
    df, step = _read_frame(path, step)
    return Trajectory(df[["x", "y"]].to_numpy(), step)


def read_trajectory(
    path: Union[str, Path], step: Optional[float] = None, atol: float = 1e-6
) -> MotionParams:
    """
    Motion parameters from a trajectory CSV (k, t, x, y, vx, vy).

    The step comes from the time column unless given. Without vx and vy the
    velocities are the position differences over the step, the last one
    repeated. With them, integrating the velocities must reproduce x and y
    within ``atol`` meters.
    """
    df, step = _read_frame(path, step)
    positions = df[["x", "y"]].to_numpy()
    if not {"vx", "vy"} <= set(df.columns):
        velocities = np.diff(positions, axis=0) / step
        velocities = np.vstack([velocities, velocities[-1:]])
        return MotionParams(positions[0], velocities, step)

    m = MotionParams(positions[0], df[["vx", "vy"]].to_numpy(), step)
    drift = np.abs(propagate(m).positions - positions).max()
    if drift > atol:
        raise ValueError(
            f"{path}: integrated velocities miss the x, y columns by {drift:.3g} m"
        )
    return m
