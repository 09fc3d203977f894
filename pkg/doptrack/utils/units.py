SPEED_OF_LIGHT = 299_792_458.0

DEFAULT_CARRIERS = (1.85e9, 1.87e9)
DEFAULT_BANDWIDTH = 2.5e6
DEFAULT_SAMPLE_RATE = 3.84e6
DEFAULT_STEP = 0.05
DEFAULT_WINDOW = 0.5


def wavelength(carrier: float) -> float:
    if carrier <= 0:
        raise ValueError(f"carrier frequency must be positive, got {carrier}")
    return SPEED_OF_LIGHT / carrier


def doppler_resolution(window_samples: int, sample_rate: float) -> float:
    """Doppler bin width 1 / (N_w T_s) in Hz."""
    return sample_rate / window_samples


def to_samples(duration: float, sample_rate: float) -> int:
    return int(round(duration * sample_rate))
