import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from doptrack.detection import Detection
from doptrack.solver import MeasurementSet

from .interpolate import interpolate_misses
from .kalman import KalmanConfig, smooth

logger = logging.getLogger(__name__)

TRACK_COLUMNS = ["k", "t", "receiver", "raw", "valid", "interpolated", "smoothed"]


@dataclass(frozen=True)
class DopplerTrackSet:
    """Raw, gap-filled and smoothed Doppler of every receiver, each shape (J, K)."""

    raw: np.ndarray
    valid: np.ndarray
    interpolated: np.ndarray
    smoothed: np.ndarray
    step: float

    def __post_init__(self):
        shapes = {a.shape for a in (self.raw, self.valid, self.interpolated, self.smoothed)}
        if len(shapes) != 1:
            raise ValueError(f"track arrays disagree in shape: {sorted(shapes)}")

    @property
    def num_receivers(self) -> int:
        return self.raw.shape[0]

    @property
    def num_instants(self) -> int:
        return self.raw.shape[1]

    def to_measurements(self) -> MeasurementSet:
        return MeasurementSet(self.smoothed.T, self.step)

    def to_frame(self) -> pd.DataFrame:
        j_count, k_count = self.raw.shape
        k = np.tile(np.arange(k_count), j_count)
        df = pd.DataFrame(
            {
                "k": k,
                "t": k * self.step,
                "receiver": np.repeat(np.arange(j_count), k_count),
                "raw": np.where(self.valid, self.raw, np.nan).ravel(),
                "valid": self.valid.ravel(),
                "interpolated": self.interpolated.ravel(),
                "smoothed": self.smoothed.ravel(),
            }
        )
        return df[TRACK_COLUMNS]


def build_track_set(
    detections: Sequence[Sequence[Detection]], step: float, cfg: KalmanConfig
) -> DopplerTrackSet:
    """
    Turn per-receiver detection sequences into gap-free smoothed tracks.

    Parameters
    ----------
    detections : sequence of sequences of Detection
        ``detections[j][k]`` is receiver ``j`` at instant ``k``.

    step : float
        Detection interval T_d in seconds.

    cfg : KalmanConfig
    """
    raw = np.array([[d.doppler for d in per_rx] for per_rx in detections], dtype=float)
    valid = np.array([[d.valid for d in per_rx] for per_rx in detections], dtype=bool)

    interpolated = np.vstack([interpolate_misses(f, ok) for f, ok in zip(raw, valid)])
    smoothed = np.vstack([smooth(f, cfg) for f in interpolated])

    for j, ok in enumerate(valid):
        logger.info("receiver %d: %d detections, %d misses", j, ok.sum(), (~ok).sum())

    return DopplerTrackSet(raw, valid, interpolated, smoothed, step)


def tracks_from_measurements(
    z: MeasurementSet, cfg: KalmanConfig, smoothing: bool = False
) -> DopplerTrackSet:
    """Track set for measurements that never went through detection (all valid)."""
    raw = z.z.T.copy()
    smoothed = np.vstack([smooth(f, cfg) for f in raw]) if smoothing else raw.copy()
    return DopplerTrackSet(raw, np.ones_like(raw, dtype=bool), raw.copy(), smoothed, z.step)
