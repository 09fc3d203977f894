import logging
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import fft

from doptrack.utils import units

logger = logging.getLogger(__name__)


class WaveformSpec(BaseModel):
    """Band-limited illuminator waveform standing in for the cellular downlink."""

    model_config = ConfigDict(frozen=True)

    bandwidth: float = Field(default=units.DEFAULT_BANDWIDTH, gt=0)
    sample_rate: float = Field(default=units.DEFAULT_SAMPLE_RATE, gt=0)
    duration: float = Field(gt=0)
    seed: int = 0
    start_time: float = 0.0

    @model_validator(mode="after")
    def _check_rate(self):
        if self.sample_rate < self.bandwidth:
            raise ValueError(
                f"sample_rate {self.sample_rate} Hz is below the bandwidth {self.bandwidth} Hz"
            )
        return self

    @property
    def num_samples(self) -> int:
        return units.to_samples(self.duration, self.sample_rate)


@dataclass(frozen=True)
class IqBuffer:
    """Complex baseband samples of one channel of one receiver."""

    samples: np.ndarray
    sample_rate: float
    start_time: float = 0.0
    label: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex).ravel()
        if len(samples) == 0:
            raise ValueError("an IqBuffer needs at least one sample")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self.samples)) / self.sample_rate

    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


def gen_waveform(spec: WaveformSpec) -> IqBuffer:
    """
    Seeded complex Gaussian noise confined to ``±bandwidth/2``.

    Out-of-band FFT bins are zeroed, then the buffer is scaled to unit
    mean-square amplitude.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.num_samples
    white = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    spectrum = fft.fft(white)
    freqs = fft.fftfreq(n, d=1.0 / spec.sample_rate)
    spectrum[np.abs(freqs) > spec.bandwidth / 2] = 0
    samples = fft.ifft(spectrum)
    samples /= np.sqrt(np.mean(np.abs(samples) ** 2))

    logger.debug("waveform seed=%d: %d samples at %.0f Hz", spec.seed, n, spec.sample_rate)
    return IqBuffer(samples, spec.sample_rate, spec.start_time, label="waveform")


def delay_samples(samples: np.ndarray, delay) -> np.ndarray:
    """
    Delay by ``delay`` samples (scalar or one value per output sample).

    Fractional delays interpolate linearly between neighbors; integer delays
    are exact shifts. Samples before the start are zero.
    """
    n = np.arange(len(samples))
    delay = np.asarray(delay, dtype=float)
    # Snap float noise from seconds-to-samples conversion.
    delay = np.where(np.abs(delay - np.round(delay)) < 1e-9, np.round(delay), delay)
    at = n - delay
    # One zero ahead of the first sample so the ramp-in interpolates too.
    xp = np.arange(-1, len(samples))
    real = np.interp(at, xp, np.concatenate([[0.0], samples.real]), left=0.0, right=0.0)
    imag = np.interp(at, xp, np.concatenate([[0.0], samples.imag]), left=0.0, right=0.0)
    return real + 1j * imag


def complex_noise(rng: np.random.Generator, n: int, power: float) -> np.ndarray:
    """Circular complex Gaussian noise with mean-square ``power``."""
    if power <= 0:
        return np.zeros(n, dtype=complex)
    scale = np.sqrt(power / 2)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
