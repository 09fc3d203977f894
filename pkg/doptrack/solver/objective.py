from typing import Tuple

import numpy as np

from doptrack.errors import LengthMismatchError
from doptrack.scenario import (
    MotionParams,
    ScenarioGeometry,
    doppler_matrices,
    position_gradients,
    propagate,
)

from .measurements import MeasurementSet


def _check_dimensions(m: MotionParams, z: MeasurementSet, g: ScenarioGeometry) -> None:
    if m.num_instants != z.num_instants:
        raise LengthMismatchError(
            f"{m.num_instants} velocities but {z.num_instants} measurement instants"
        )
    if z.num_receivers != g.num_receivers:
        raise LengthMismatchError(
            f"{z.num_receivers} measurement columns but {g.num_receivers} receivers"
        )


def residuals(m: MotionParams, z: MeasurementSet, g: ScenarioGeometry) -> np.ndarray:
    """Model minus measured Doppler, shape (K, J)."""
    _check_dimensions(m, z, g)
    positions = propagate(m).positions
    model = np.einsum("kjd,kd->kj", doppler_matrices(g, positions), m.velocities)
    return model - z.z


def objective(m: MotionParams, z: MeasurementSet, g: ScenarioGeometry) -> float:
    """
    Sum of squared Doppler residuals over all instants and receivers, in Hz².

    Equals ``tr[(Z - Z̃)ᵀ (Z - Z̃)]`` with ``Z`` the forward-model Doppler of ``m``.
    """
    r = residuals(m, z, g)
    return float(np.sum(r * r))


def _blocks(m: MotionParams, g: ScenarioGeometry) -> Tuple[np.ndarray, np.ndarray]:
    positions = propagate(m).positions
    d = doppler_matrices(g, positions)
    grad = position_gradients(g, positions, m.velocities)
    return d, grad


def jacobian(m: MotionParams, z: MeasurementSet, g: ScenarioGeometry) -> np.ndarray:
    """
    Residual Jacobian, shape (K·J, 2 + 2K).

    Rows follow ``residuals(...).ravel()`` (instant-major); columns follow
    :meth:`MotionParams.as_vector`. Instant ``k`` depends on ``p1`` and on
    every ``v_κ`` with ``κ <= k``: through its position for ``κ < k``
    (``step·G_k``) and directly for ``κ = k`` (``D_k``). Later velocities
    have exactly zero columns.
    """
    _check_dimensions(m, z, g)
    d, grad = _blocks(m, g)
    k_count, j_count = d.shape[:2]

    full = np.zeros((k_count, j_count, k_count + 1, 2))
    full[:, :, 0, :] = grad
    earlier = np.tril(np.ones((k_count, k_count)), -1)
    full[:, :, 1:, :] = m.step * grad[:, :, None, :] * earlier[:, None, :, None]
    ks = np.arange(k_count)
    full[ks, :, ks + 1, :] = d

    return full.reshape(k_count * j_count, 2 * (k_count + 1))


def _exclusive_suffix_sum(blocks: np.ndarray) -> np.ndarray:
    """``out[b] = Σ_{k > b} blocks[k]``."""
    inclusive = np.cumsum(blocks[::-1], axis=0)[::-1]
    return inclusive - blocks


def normal_equations(
    m: MotionParams, z: MeasurementSet, g: ScenarioGeometry
) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    ``JᵀJ``, ``Jᵀr`` and the objective without forming ``J``.

    The causal structure makes every velocity-velocity block depend only on
    the later of the two instants, so the products reduce to suffix sums of
    per-instant 2×2 blocks.
    """
    _check_dimensions(m, z, g)
    d, grad = _blocks(m, g)
    r = np.einsum("kjd,kd->kj", d, m.velocities) - z.z
    t = m.step
    k_count = len(d)

    gtg = np.einsum("kja,kjb->kab", grad, grad)
    gtd = np.einsum("kja,kjb->kab", grad, d)
    dtd = np.einsum("kja,kjb->kab", d, d)
    later_gtg = _exclusive_suffix_sum(gtg)

    a_pp = gtg.sum(axis=0)
    a_pv = gtd + t * later_gtg
    coupling = t * gtd + t * t * later_gtg
    diagonal = dtd + t * t * later_gtg

    ks = np.arange(k_count)
    later = np.maximum.outer(ks, ks)
    upper = (ks[:, None] < ks[None, :])[..., None, None]
    a_vv = np.where(upper, coupling[later], np.swapaxes(coupling, -1, -2)[later])
    a_vv[ks, ks] = diagonal
    a_vv = a_vv.transpose(0, 2, 1, 3).reshape(2 * k_count, 2 * k_count)

    n = 2 * (k_count + 1)
    normal = np.empty((n, n))
    normal[:2, :2] = a_pp
    normal[:2, 2:] = a_pv.transpose(1, 0, 2).reshape(2, 2 * k_count)
    normal[2:, :2] = normal[:2, 2:].T
    normal[2:, 2:] = a_vv

    gr = np.einsum("kja,kj->ka", grad, r)
    dr = np.einsum("kja,kj->ka", d, r)
    gradient = np.concatenate([gr.sum(axis=0), (dr + t * _exclusive_suffix_sum(gr)).ravel()])

    return normal, gradient, float(np.sum(r * r))
