import logging
from typing import Iterator, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import linalg

from doptrack.errors import LengthMismatchError, SingularSystemError
from doptrack.signal import IqBuffer

logger = logging.getLogger(__name__)


class CancellerConfig(BaseModel):
    """
    Block least-squares canceller settings.

    Parameters
    ----------
    max_delay_taps : int
        Number of delayed reference copies spanning the clutter subspace.

    block_length : int
        Samples per independent LS block; the pipeline uses the CAF window.

    regularization : float
        Tikhonov load relative to the mean diagonal of XᴴX. Zero solves the
        plain normal equations.
    """

    model_config = ConfigDict(frozen=True)

    max_delay_taps: int = Field(default=8, ge=1)
    block_length: int = Field(ge=2)
    regularization: float = Field(default=1e-9, ge=0)

    @model_validator(mode="after")
    def _check_taps(self):
        if self.max_delay_taps >= self.block_length:
            raise ValueError("max_delay_taps must be smaller than block_length")
        return self


def blocks(length: int, block_length: int) -> Iterator[Tuple[int, int]]:
    """Block bounds; a trailing remainder is merged into the last block."""
    starts = list(range(0, length - block_length + 1, block_length)) or [0]
    for i, start in enumerate(starts):
        stop = starts[i + 1] if i + 1 < len(starts) else length
        yield start, stop


def delayed_columns(ref: np.ndarray, taps: int) -> np.ndarray:
    """View whose row ``n``, column ``l`` is ``ref[n - l]`` (zero before the start)."""
    padded = np.concatenate([np.zeros(taps - 1, dtype=complex), ref])
    return sliding_window_view(padded, taps)[:, ::-1]


def cancel(surv: IqBuffer, ref: IqBuffer, cfg: CancellerConfig) -> IqBuffer:
    """
    Remove zero-Doppler interference by projecting out delayed reference copies.

    Per block the residual is ``y - X (XᴴX + εI)⁻¹ Xᴴ y`` where the columns
    of X are the reference delayed by ``0 .. max_delay_taps-1`` samples.

    Parameters
    ----------
    surv : IqBuffer
        Surveillance channel.

    ref : IqBuffer
        Reference channel, aligned with ``surv``.

    cfg : CancellerConfig

    Returns
    -------
    IqBuffer
        Cleaned surveillance channel of the same length.
    """
    if len(surv) != len(ref):
        raise LengthMismatchError(
            f"surveillance has {len(surv)} samples, reference has {len(ref)}"
        )
    if len(surv) < cfg.block_length:
        raise LengthMismatchError(
            f"buffer of {len(surv)} samples is shorter than one block ({cfg.block_length})"
        )

    y = surv.samples
    out = np.empty_like(y)
    taps = cfg.max_delay_taps
    lagged = delayed_columns(ref.samples, taps)

    for start, stop in blocks(len(y), cfg.block_length):
        x = lagged[start:stop]
        gram = x.conj().T @ x
        rhs = x.conj().T @ y[start:stop]

        load = cfg.regularization * np.real(np.trace(gram)) / taps
        try:
            factor = linalg.cho_factor(gram + load * np.eye(taps))
        except linalg.LinAlgError as error:
            raise SingularSystemError(
                f"normal equations of block [{start}, {stop}) are singular"
            ) from error
        weights = linalg.cho_solve(factor, rhs)
        out[start:stop] = y[start:stop] - x @ weights

    logger.debug(
        "cancelled %d blocks: power %.3e -> %.3e",
        max(1, len(y) // cfg.block_length),
        surv.power(),
        float(np.mean(np.abs(out) ** 2)),
    )
    return IqBuffer(out, surv.sample_rate, surv.start_time, label="cleaned")
