import logging
from dataclasses import dataclass
from typing import List, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import fft

from doptrack.errors import LengthMismatchError, WindowRangeError
from doptrack.signal import IqBuffer
from doptrack.utils import units

logger = logging.getLogger(__name__)


class CafConfig(BaseModel):
    """
    Windowing, Doppler grid and CFAR settings of the cross-ambiguity stage.

    The Doppler bin width is ``sample_rate / window_samples``; the grid holds
    every multiple of it inside ``[doppler_min, doppler_max]``.
    """

    model_config = ConfigDict(frozen=True)

    window_samples: int = Field(ge=1)
    hop_samples: int = Field(ge=1)
    doppler_min: float = -250.0
    doppler_max: float = 250.0
    delay_grid: List[int] = Field(default_factory=lambda: [0])
    gamma: float = Field(default=1.5, gt=1)
    train_half_len: int = Field(default=8, ge=1)
    include_test_cell: bool = True

    @model_validator(mode="after")
    def _check_grid(self):
        if not self.doppler_min < self.doppler_max:
            raise ValueError("doppler_min must be below doppler_max")
        if not self.delay_grid or any(d < 0 for d in self.delay_grid):
            raise ValueError("delay_grid needs at least one non-negative delay")
        return self

    @classmethod
    def from_durations(
        cls,
        sample_rate: float,
        window: float = units.DEFAULT_WINDOW,
        step: float = units.DEFAULT_STEP,
        **kwargs,
    ) -> "CafConfig":
        return cls(
            window_samples=units.to_samples(window, sample_rate),
            hop_samples=units.to_samples(step, sample_rate),
            **kwargs,
        )

    def bin_width(self, sample_rate: float) -> float:
        return units.doppler_resolution(self.window_samples, sample_rate)

    def bin_indices(self, sample_rate: float) -> np.ndarray:
        """Signed DFT bin numbers of the Doppler grid, ascending."""
        width = self.bin_width(sample_rate)
        lo = int(np.ceil(self.doppler_min / width - 1e-9))
        hi = int(np.floor(self.doppler_max / width + 1e-9))
        if hi - lo + 1 > self.window_samples:
            raise ValueError("Doppler grid is wider than the sample rate allows")
        return np.arange(lo, hi + 1)

    def doppler_grid(self, sample_rate: float) -> np.ndarray:
        return self.bin_indices(sample_rate) * self.bin_width(sample_rate)

    def num_windows(self, num_samples: int) -> int:
        if num_samples < self.window_samples:
            return 0
        return (num_samples - self.window_samples) // self.hop_samples + 1


@dataclass(frozen=True)
class CafMap:
    """|R(f_D)| of one window over the Doppler grid."""

    amplitudes: np.ndarray
    frequencies: np.ndarray
    k: int
    receiver: int = 0
    best_delay: int = 0

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0]) if len(self.frequencies) > 1 else 0.0


def _lagged_reference(ref: np.ndarray, start: int, length: int, delay: int) -> np.ndarray:
    """``ref[n - delay]`` for n in the window, zero before the buffer start."""
    lo = start - delay
    if lo >= 0:
        return ref[lo : lo + length]
    return np.concatenate([np.zeros(-lo, dtype=complex), ref[: length + lo]])


def caf_window(
    surv: IqBuffer,
    ref: IqBuffer,
    k: int,
    cfg: CafConfig,
    receiver: int = 0,
    method: Literal["fft", "direct"] = "fft",
) -> CafMap:
    """
    Cross-ambiguity amplitudes of window ``k`` over the Doppler grid.

    Window ``k`` covers samples ``k·hop .. k·hop + window - 1``. For every
    Doppler cell the amplitude is the largest ``|Σ y_s[n] y_r*[n-τ] e^{-j2π f n T_s}|``
    over the delay grid, with ``n`` counted from the window start.

    Parameters
    ----------
    surv : IqBuffer
        Cleaned surveillance channel.

    ref : IqBuffer
        Reference channel.

    k : int
        0-based window index.

    cfg : CafConfig

    method : {"fft", "direct"}
        ``"fft"`` reads the grid off one DFT per delay; ``"direct"`` sums
        the exponentials explicitly.

    Returns
    -------
    CafMap
    """
    if len(surv) != len(ref):
        raise LengthMismatchError(
            f"surveillance has {len(surv)} samples, reference has {len(ref)}"
        )
    n_w = cfg.window_samples
    start = k * cfg.hop_samples
    if k < 0 or start + n_w > len(surv):
        raise WindowRangeError(
            f"window {k} needs samples [{start}, {start + n_w}) of a {len(surv)}-sample buffer"
        )

    bins = cfg.bin_indices(surv.sample_rate)
    frequencies = bins * cfg.bin_width(surv.sample_rate)
    window = surv.samples[start : start + n_w]

    per_delay = np.empty((len(cfg.delay_grid), len(bins)))
    for i, delay in enumerate(cfg.delay_grid):
        product = window * np.conj(_lagged_reference(ref.samples, start, n_w, delay))
        if method == "fft":
            spectrum = fft.fft(product)[bins % n_w]
        else:
            n = np.arange(n_w)
            kernel = np.exp(-2j * np.pi * np.outer(frequencies, n) / surv.sample_rate)
            spectrum = kernel @ product
        per_delay[i] = np.abs(spectrum)

    amplitudes = per_delay.max(axis=0)
    peak = int(np.argmax(amplitudes))
    best_delay = cfg.delay_grid[int(np.argmax(per_delay[:, peak]))]
    return CafMap(amplitudes, frequencies, k, receiver, best_delay)


def caf_maps(surv: IqBuffer, ref: IqBuffer, cfg: CafConfig, receiver: int = 0) -> List[CafMap]:
    """Every complete window of a buffer pair."""
    count = cfg.num_windows(len(surv))
    logger.debug("receiver %d: %d CAF windows", receiver, count)
    return [caf_window(surv, ref, k, cfg, receiver) for k in range(count)]
