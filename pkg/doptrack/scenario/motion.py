from dataclasses import dataclass

import numpy as np

from .geometry import ScenarioGeometry, doppler_matrices


@dataclass(frozen=True)
class MotionParams:
    """
    Unknown motion vector: initial position plus one velocity per instant.

    Velocities are piecewise constant over ``[k·step, (k+1)·step)``.
    """

    initial_position: np.ndarray
    velocities: np.ndarray
    step: float

    def __post_init__(self):
        p = np.asarray(self.initial_position, dtype=float).reshape(2)
        v = np.asarray(self.velocities, dtype=float).reshape(-1, 2)
        if len(v) == 0:
            raise ValueError("velocities must not be empty")
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        object.__setattr__(self, "initial_position", p)
        object.__setattr__(self, "velocities", v)

    @property
    def num_instants(self) -> int:
        return len(self.velocities)

    def as_vector(self) -> np.ndarray:
        """Flatten to ``[x1, y1, vx1, vy1, ..., vxK, vyK]``."""
        return np.concatenate([self.initial_position, self.velocities.ravel()])

    @classmethod
    def from_vector(cls, vector: np.ndarray, step: float) -> "MotionParams":
        vector = np.asarray(vector, dtype=float)
        return cls(vector[:2], vector[2:].reshape(-1, 2), step)


@dataclass(frozen=True)
class Trajectory:
    positions: np.ndarray
    step: float

    def __post_init__(self):
        object.__setattr__(
            self, "positions", np.asarray(self.positions, dtype=float).reshape(-1, 2)
        )

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.positions)) * self.step


def propagate(m: MotionParams) -> Trajectory:
    """
    Integrate the velocities from the initial position.

    ``positions[k] = positions[k-1] + velocities[k-1] * step``; the last
    velocity only drives the Doppler of the last instant.

    Examples
    --------
    >>> propagate(MotionParams((0, 0), [(1, 0), (1, 0)], 0.05)).positions
    array([[0.  , 0.  ],
           [0.05, 0.  ]])
    """
    steps = np.cumsum(m.velocities[:-1] * m.step, axis=0)
    positions = np.vstack([m.initial_position, m.initial_position + steps])
    return Trajectory(positions, m.step)


def forward_doppler(g: ScenarioGeometry, m: MotionParams) -> np.ndarray:
    """Forward-model bistatic Doppler of every receiver, shape (K, J), Hz."""
    positions = propagate(m).positions
    return np.einsum("kjd,kd->kj", doppler_matrices(g, positions), m.velocities)
