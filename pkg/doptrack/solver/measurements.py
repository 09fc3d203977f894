from dataclasses import dataclass
from typing import Optional

import numpy as np

from doptrack.scenario import MotionParams, ScenarioGeometry, forward_doppler


@dataclass(frozen=True)
class MeasurementSet:
    """Smoothed Doppler per instant (rows) and receiver (columns), in Hz."""

    z: np.ndarray
    step: float

    def __post_init__(self):
        z = np.atleast_2d(np.asarray(self.z, dtype=float))
        if not np.all(np.isfinite(z)):
            raise ValueError("measurements must be finite")
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        object.__setattr__(self, "z", z)

    @property
    def num_instants(self) -> int:
        return self.z.shape[0]

    @property
    def num_receivers(self) -> int:
        return self.z.shape[1]


def simulate_measurements(
    g: ScenarioGeometry,
    truth: MotionParams,
    resolution: float = 0.0,
    noise_std: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> MeasurementSet:
    """
    Forward-model Doppler plus Gaussian noise, rounded to a ``resolution`` grid.

    The noise goes in before the rounding, so every value sits on the grid
    like a CAF peak does. ``resolution=0`` and ``noise_std=0`` give the
    noiseless forward model.
    """
    z = forward_doppler(g, truth)
    if noise_std > 0:
        rng = rng if rng is not None else np.random.default_rng()
        z = z + rng.normal(0.0, noise_std, size=z.shape)
    if resolution > 0:
        z = np.round(z / resolution) * resolution
    return MeasurementSet(z, truth.step)
