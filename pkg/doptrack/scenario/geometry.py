from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from doptrack.errors import DegenerateGeometryError
from doptrack.utils import units

Point = Tuple[float, float]

# Distances below this (meters) make a unit vector undefined.
MIN_DISTANCE = 1e-9


class ScenarioGeometry(BaseModel):
    """
    Fixed station layout shared by the simulator and the solver.

    Parameters
    ----------
    tx_positions : list of (x, y)
        Illuminator positions in meters.

    rx_positions : list of (x, y)
        Receiver positions in meters.

    wavelengths : list of float, optional
        Wavelength of each illuminator in meters.

    carrier_frequencies : list of float, optional
        Alternative to ``wavelengths``, in Hz.

    pairing : list of int
        ``pairing[j]`` is the illuminator index receiver ``j`` listens to.
    """

    model_config = ConfigDict(frozen=True)

    tx_positions: List[Point] = Field(min_length=1)
    rx_positions: List[Point] = Field(min_length=1)
    wavelengths: List[float] = Field(default_factory=list)
    carrier_frequencies: Optional[List[float]] = None
    pairing: List[int]

    @model_validator(mode="before")
    @classmethod
    def _wavelengths_from_carriers(cls, data):
        if isinstance(data, dict) and not data.get("wavelengths"):
            carriers = data.get("carrier_frequencies")
            if carriers:
                data = {**data, "wavelengths": [units.wavelength(f) for f in carriers]}
        return data

    @model_validator(mode="after")
    def _check_layout(self):
        if len(self.wavelengths) != len(self.tx_positions):
            raise ValueError(
                f"expected {len(self.tx_positions)} wavelengths, got {len(self.wavelengths)}"
            )
        if any(w <= 0 for w in self.wavelengths):
            raise ValueError("every wavelength must be positive")
        if len(self.pairing) != len(self.rx_positions):
            raise ValueError("every receiver must map to exactly one illuminator")
        for j, i in enumerate(self.pairing):
            if not 0 <= i < len(self.tx_positions):
                raise ValueError(f"receiver {j} paired with unknown illuminator {i}")
            if np.allclose(self.rx_positions[j], self.tx_positions[i], rtol=0, atol=MIN_DISTANCE):
                raise ValueError(f"receiver {j} coincides with its illuminator {i}")
        return self

    @property
    def num_receivers(self) -> int:
        return len(self.rx_positions)

    @property
    def rx(self) -> np.ndarray:
        return np.asarray(self.rx_positions, dtype=float)

    @property
    def tx(self) -> np.ndarray:
        """Illuminator position seen by each receiver, shape (J, 2)."""
        return np.asarray([self.tx_positions[i] for i in self.pairing], dtype=float)

    @property
    def rx_wavelengths(self) -> np.ndarray:
        return np.asarray([self.wavelengths[i] for i in self.pairing], dtype=float)

    def translated(self, offset: Sequence[float]) -> "ScenarioGeometry":
        dx, dy = offset
        return ScenarioGeometry(
            tx_positions=[(x + dx, y + dy) for x, y in self.tx_positions],
            rx_positions=[(x + dx, y + dy) for x, y in self.rx_positions],
            wavelengths=list(self.wavelengths),
            pairing=list(self.pairing),
        )


def _unit_vectors(stations: np.ndarray, positions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unit vectors station -> target and distances, shapes (K, J, 2) and (K, J)."""
    diff = positions[:, None, :] - stations[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    if np.any(dist < MIN_DISTANCE):
        k, j = np.argwhere(dist < MIN_DISTANCE)[0]
        raise DegenerateGeometryError(
            f"position {tuple(positions[k])} coincides with a station of receiver {j}"
        )
    return diff / dist[..., None], dist


def doppler_matrices(g: ScenarioGeometry, positions: np.ndarray) -> np.ndarray:
    """Stack of D_k for every position, shape (K, J, 2), in Hz per m/s."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    u_tx, _ = _unit_vectors(g.tx, positions)
    u_rx, _ = _unit_vectors(g.rx, positions)
    return -(u_tx + u_rx) / g.rx_wavelengths[None, :, None]


def doppler_matrix(g: ScenarioGeometry, position: Sequence[float]) -> np.ndarray:
    """
    Bistatic Doppler sensitivity of every receiver at ``position``.

    Row ``j`` is ``-(u_tx + u_rx) / wavelength`` for receiver ``j``, so that
    ``doppler_matrix(g, p) @ v`` stacks the bistatic Doppler frequencies.

    Returns
    -------
    numpy.ndarray
        Shape (J, 2), Hz per m/s.
    """
    return doppler_matrices(g, np.asarray(position, dtype=float)[None, :])[0]


def bistatic_doppler(
    g: ScenarioGeometry,
    rx_index: int,
    position: Sequence[float],
    velocity: Sequence[float],
) -> float:
    """
    Bistatic Doppler frequency at one receiver.

    Examples
    --------
    >>> g = ScenarioGeometry(
    ...     tx_positions=[(-100, 0)], rx_positions=[(100, 0)], wavelengths=[0.1621], pairing=[0]
    ... )
    >>> abs(bistatic_doppler(g, 0, (0, 0), (3, 1)))
    0.0
    """
    row = doppler_matrix(g, position)[rx_index]
    return float(row @ np.asarray(velocity, dtype=float))


def position_gradients(
    g: ScenarioGeometry, positions: np.ndarray, velocities: np.ndarray
) -> np.ndarray:
    """
    Gradient of D(p)·v with respect to p at every instant, shape (K, J, 2).

    Uses d(u)/dp = (I - u uᵀ) / ‖p - s‖ for each unit vector u.
    """
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    velocities = np.atleast_2d(np.asarray(velocities, dtype=float))
    grad = np.zeros((len(positions), g.num_receivers, 2))
    v = velocities[:, None, :]
    for stations in (g.tx, g.rx):
        u, dist = _unit_vectors(stations, positions)
        along = np.sum(u * v, axis=-1, keepdims=True)
        grad += (v - u * along) / dist[..., None]
    return -grad / g.rx_wavelengths[None, :, None]


def bistatic_excess_range(g: ScenarioGeometry, positions: np.ndarray) -> np.ndarray:
    """‖p - tx‖ + ‖p - rx‖ - ‖tx - rx‖ per instant and receiver, shape (K, J)."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    _, d_tx = _unit_vectors(g.tx, positions)
    _, d_rx = _unit_vectors(g.rx, positions)
    baseline = np.linalg.norm(g.tx - g.rx, axis=-1)
    return d_tx + d_rx - baseline[None, :]
