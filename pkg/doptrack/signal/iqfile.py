import json
from pathlib import Path
from typing import TypedDict, Union

import numpy as np

from .waveform import IqBuffer

PathLike = Union[str, Path]

SAMPLE_DTYPE = "<f4"


class IqSidecar(TypedDict):
    sample_rate: float
    start_time: float
    label: str
    num_samples: int
    format: str


def write_iq(path: PathLike, buf: IqBuffer) -> Path:
    """
    Write ``<path>.cf32`` (interleaved little-endian float32 I/Q) and a
    ``<path>.json`` sidecar with the buffer metadata.

    Returns
    -------
    pathlib.Path
        Path of the sample file.
    """
    base = Path(path).with_suffix("")
    data_path = base.with_suffix(".cf32")

    interleaved = np.empty(2 * len(buf), dtype=SAMPLE_DTYPE)
    interleaved[0::2] = buf.samples.real
    interleaved[1::2] = buf.samples.imag
    interleaved.tofile(data_path)

    sidecar: IqSidecar = {
        "sample_rate": buf.sample_rate,
        "start_time": buf.start_time,
        "label": buf.label,
        "num_samples": len(buf),
        "format": "cf32_le",
    }
    base.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return data_path


def read_iq(path: PathLike) -> IqBuffer:
    base = Path(path).with_suffix("")
    sidecar: IqSidecar = json.loads(base.with_suffix(".json").read_text())

    interleaved = np.fromfile(base.with_suffix(".cf32"), dtype=SAMPLE_DTYPE)
    if len(interleaved) != 2 * sidecar["num_samples"]:
        raise ValueError(
            f"{base}.cf32 holds {len(interleaved) // 2} samples, "
            f"sidecar says {sidecar['num_samples']}"
        )
    samples = interleaved[0::2].astype(float) + 1j * interleaved[1::2].astype(float)
    return IqBuffer(samples, sidecar["sample_rate"], sidecar["start_time"], sidecar["label"])
