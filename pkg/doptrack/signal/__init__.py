from .waveform import WaveformSpec, IqBuffer, gen_waveform, delay_samples
from .channels import ChannelSpec, ClutterPath, synth_reference, synth_surveillance
from .iqfile import write_iq, read_iq

__all__ = [
    "WaveformSpec",
    "IqBuffer",
    "ChannelSpec",
    "ClutterPath",
    "gen_waveform",
    "delay_samples",
    "synth_reference",
    "synth_surveillance",
    "write_iq",
    "read_iq",
]
