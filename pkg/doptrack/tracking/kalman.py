import numpy as np
from pydantic import BaseModel, ConfigDict, Field

# State is [f, df] with df in Hz per detection step.
TRANSITION = np.array([[1.0, 1.0], [0.0, 1.0]])
OBSERVATION = np.array([[1.0, 0.0]])
# Rate random walk: a unit rate kick moves f by half a step.
NOISE_SHAPE = np.array([[0.25, 0.5], [0.5, 1.0]])


class KalmanConfig(BaseModel):
    """
    Constant-rate Doppler filter settings, all variances strictly positive.

    Parameters
    ----------
    process_noise : float
        Variance of the per-step rate kick, Hz²/step.

    measurement_noise : float
        Variance of one Doppler estimate, Hz².

    initial_variance : float
        Prior variance of both state components.

    backward_pass : bool
        Run a Rauch-Tung-Striebel pass after the forward filter.
    """

    model_config = ConfigDict(frozen=True)

    process_noise: float = Field(default=1.0, gt=0)
    measurement_noise: float = Field(default=1.0, gt=0)
    initial_variance: float = Field(default=1.0, gt=0)
    backward_pass: bool = False


def smooth(track: np.ndarray, cfg: KalmanConfig) -> np.ndarray:
    """
    Kalman-filter a gap-free Doppler track.

    The initial state is the first sample and the first difference; the
    first output is the update with the first sample.
    """
    z = np.asarray(track, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("smooth expects a gap-free track; interpolate misses first")
    if len(z) < 2:
        return z.copy()

    q = cfg.process_noise * NOISE_SHAPE
    r = cfg.measurement_noise

    x = np.array([z[0], z[1] - z[0]])
    p = cfg.initial_variance * np.eye(2)

    n = len(z)
    filtered = np.empty((n, 2))
    covariances = np.empty((n, 2, 2))
    predicted = np.empty((n, 2))
    predicted_cov = np.empty((n, 2, 2))

    for k in range(n):
        if k > 0:
            x = TRANSITION @ x
            p = TRANSITION @ p @ TRANSITION.T + q
        predicted[k], predicted_cov[k] = x, p

        innovation = z[k] - x[0]
        s = p[0, 0] + r
        gain = p[:, 0] / s
        x = x + gain * innovation
        p = p - np.outer(gain, OBSERVATION @ p)

        filtered[k], covariances[k] = x, p

    if not cfg.backward_pass:
        return filtered[:, 0]

    smoothed = filtered.copy()
    for k in range(n - 2, -1, -1):
        c = covariances[k] @ TRANSITION.T @ np.linalg.inv(predicted_cov[k + 1])
        smoothed[k] = filtered[k] + c @ (smoothed[k + 1] - predicted[k + 1])
    return smoothed[:, 0]
