from dataclasses import dataclass

import numpy as np

from .caf import CafConfig, CafMap


@dataclass(frozen=True)
class Detection:
    """One Doppler estimate per receiver and instant; ``valid=False`` marks a miss."""

    k: int
    doppler: float
    amplitude: float
    valid: bool
    threshold: float = float("nan")


def cfar_threshold(caf_map: CafMap, cfg: CafConfig) -> np.ndarray:
    """
    Cell-averaging threshold over the Doppler grid.

    ``β(f) = γ / n · Σ |R(f + cΔf)|`` for ``c = -C..C``, where ``n`` counts the
    cells that exist: near the grid edges the window shrinks and is
    renormalized. With ``include_test_cell=False`` the ``c = 0`` cell is left
    out of both the sum and the count.

    Examples
    --------
    A spike of height S on a zero background with C = 8 gives ``γ·S/17`` at
    the spike.
    """
    amplitudes = np.asarray(caf_map.amplitudes, dtype=float)
    c = cfg.train_half_len
    if len(amplitudes) <= 2 * c:
        raise ValueError(f"Doppler grid of {len(amplitudes)} cells is too short for C = {c}")
    kernel = np.ones(2 * c + 1)
    if not cfg.include_test_cell:
        kernel[c] = 0.0

    sums = np.convolve(amplitudes, kernel, mode="same")
    counts = np.convolve(np.ones_like(amplitudes), kernel, mode="same")
    return cfg.gamma * sums / counts


def detect(caf_map: CafMap, cfg: CafConfig) -> Detection:
    """
    Pick the strongest nonzero cell among those at or above the CFAR threshold.

    Ties go to the lower Doppler cell. When no cell passes the result is a
    miss (``valid=False``) carrying the global peak for diagnostics.
    """
    amplitudes = np.asarray(caf_map.amplitudes, dtype=float)
    thresholds = cfar_threshold(caf_map, cfg)
    passing = (amplitudes >= thresholds) & (amplitudes > 0)

    if not passing.any():
        peak = int(np.argmax(amplitudes))
        return Detection(
            caf_map.k,
            float(caf_map.frequencies[peak]),
            float(amplitudes[peak]),
            False,
            float(thresholds[peak]),
        )

    masked = np.where(passing, amplitudes, -np.inf)
    best = int(np.argmax(masked))
    return Detection(
        caf_map.k,
        float(caf_map.frequencies[best]),
        float(amplitudes[best]),
        True,
        float(thresholds[best]),
    )
