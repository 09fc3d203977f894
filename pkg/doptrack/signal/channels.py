import logging
from typing import Annotated, List

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field

from doptrack.errors import LengthMismatchError
from doptrack.scenario import (
    MotionParams,
    ScenarioGeometry,
    bistatic_excess_range,
    forward_doppler,
    propagate,
)
from doptrack.utils import units

from .waveform import IqBuffer, complex_noise, delay_samples

logger = logging.getLogger(__name__)


def _as_complex(value):
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(re, im)
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    return value


Gain = Annotated[complex, BeforeValidator(_as_complex)]


class ClutterPath(BaseModel):
    model_config = ConfigDict(frozen=True)

    gain: Gain
    delay: float = Field(default=0.0, ge=0)


class ChannelSpec(BaseModel):
    """
    Propagation of one receiver's reference and surveillance channels.

    Complex gains accept ``[re, im]`` pairs, numbers or strings like ``"1+2j"``.
    Delays are in seconds, ``noise_power`` is the linear mean-square noise of
    each channel.
    """

    model_config = ConfigDict(frozen=True)

    los_gain: Gain = 1 + 0j
    los_delay: float = Field(default=0.0, ge=0)
    clutter_paths: List[ClutterPath] = Field(default_factory=list)
    target_gain: Gain = 0.1 + 0j
    noise_power: float = Field(default=0.0, ge=0)


def synth_reference(wave: IqBuffer, ch: ChannelSpec, seed: int) -> IqBuffer:
    """LoS copy of the illuminator waveform plus receiver noise."""
    if ch.los_delay >= wave.duration:
        raise LengthMismatchError(
            f"LoS delay {ch.los_delay} s exceeds the buffer duration {wave.duration} s"
        )
    rng = np.random.default_rng(seed)
    direct = ch.los_gain * delay_samples(wave.samples, ch.los_delay * wave.sample_rate)
    samples = direct + complex_noise(rng, len(wave), ch.noise_power)
    return IqBuffer(samples, wave.sample_rate, wave.start_time, label="reference")


def instant_indices(
    times: np.ndarray, step: float, num_instants: int, edge_hold: float
) -> np.ndarray:
    """Detection interval of every sample time, holding the edges for ``edge_hold`` seconds."""
    span_end = num_instants * step
    if times[0] < -edge_hold or times[-1] > span_end + edge_hold:
        raise LengthMismatchError(
            f"buffer covers [{times[0]:.3f}, {times[-1]:.3f}] s but the trajectory only "
            f"covers [0, {span_end:.3f}] s"
        )
    return np.clip(np.floor(times / step).astype(int), 0, num_instants - 1)


def target_echo(
    wave: IqBuffer,
    ch: ChannelSpec,
    g: ScenarioGeometry,
    rx_index: int,
    truth: MotionParams,
    edge_hold: float = 0.5,
) -> np.ndarray:
    """
    Delayed, Doppler-shifted copy of the waveform scattered off the target.

    Doppler and delay are constant within each detection interval; the phase
    is the running integral of the instantaneous Doppler, so it is continuous
    across interval boundaries.
    """
    positions = propagate(truth).positions
    doppler = forward_doppler(g, truth)[:, rx_index]
    excess = bistatic_excess_range(g, positions)[:, rx_index]

    idx = instant_indices(wave.times, truth.step, truth.num_instants, edge_hold)
    ts = 1.0 / wave.sample_rate

    frequency = doppler[idx]
    phase = 2 * np.pi * ts * np.concatenate([[0.0], np.cumsum(frequency[:-1])])

    delay = (ch.los_delay + excess[idx] / units.SPEED_OF_LIGHT) * wave.sample_rate
    return ch.target_gain * delay_samples(wave.samples, delay) * np.exp(1j * phase)


def synth_surveillance(
    wave: IqBuffer,
    ch: ChannelSpec,
    g: ScenarioGeometry,
    rx_index: int,
    truth: MotionParams,
    seed: int,
    edge_hold: float = 0.5,
) -> IqBuffer:
    """
    Surveillance channel: target echo, static clutter paths and noise.

    Parameters
    ----------
    wave : IqBuffer
        Waveform of the illuminator paired with ``rx_index``.

    ch : ChannelSpec
        Gains and delays of this receiver's channels.

    truth : MotionParams
        Ground-truth motion; instant ``k`` spans ``[k·step, (k+1)·step)``.

    edge_hold : float
        Seconds the buffer may extend past either end of the trajectory; the
        first and last intervals are held there.
    """
    rng = np.random.default_rng(seed)

    samples = target_echo(wave, ch, g, rx_index, truth, edge_hold)
    for path in ch.clutter_paths:
        samples += path.gain * delay_samples(wave.samples, path.delay * wave.sample_rate)
    samples += complex_noise(rng, len(wave), ch.noise_power)

    logger.debug(
        "receiver %d: surveillance with %d clutter paths", rx_index, len(ch.clutter_paths)
    )
    return IqBuffer(samples, wave.sample_rate, wave.start_time, label="surveillance")
