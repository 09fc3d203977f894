import logging
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import linalg

from doptrack.errors import DegenerateGeometryError, SolverFailedError
from doptrack.scenario import (
    MotionParams,
    ScenarioGeometry,
    Trajectory,
    doppler_matrix,
    propagate,
)

from .measurements import MeasurementSet
from .objective import normal_equations, residuals

logger = logging.getLogger(__name__)

# Damping above this multiple of the initial curvature scale means no
# descent direction is left.
DAMPING_CEILING = 1e16


class SolverConfig(BaseModel):
    """
    Multi-start Levenberg-Marquardt settings.

    Starts are spread over ``grid_shape`` cells of ``init_position_region``
    (``x_min, x_max, y_min, y_max``), ``candidates_per_point`` per cell, each
    jittered uniformly inside its cell. ``num_starts`` overrides the count;
    starts then cycle through the cells.
    """

    model_config = ConfigDict(frozen=True)

    num_starts: Optional[int] = Field(default=None, ge=1)
    grid_shape: Tuple[int, int] = (5, 5)
    candidates_per_point: int = Field(default=5, ge=1)
    max_iters: int = Field(default=200, ge=1)
    init_position_region: Tuple[float, float, float, float] = (-20.0, 20.0, -20.0, 20.0)
    init_velocity_scale: float = Field(default=2.0, gt=0)
    velocity_init: Literal["dead_reckoning", "random"] = "dead_reckoning"
    damping_init: float = Field(default=1e-3, gt=0)
    damping_up: float = Field(default=10.0, gt=1)
    damping_down: float = Field(default=0.1, gt=0, lt=1)
    convergence_tol: float = Field(default=1e-10, gt=0)
    objective_floor: float = Field(default=1e-20, ge=0)
    velocity_smoothing: float = Field(default=0.0, ge=0)
    ambiguity_radius: float = Field(default=1.0, gt=0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_region(self):
        x_min, x_max, y_min, y_max = self.init_position_region
        if not (x_min < x_max and y_min < y_max):
            raise ValueError("init_position_region must be a non-empty rectangle")
        if min(self.grid_shape) < 1:
            raise ValueError("grid_shape needs at least one cell per axis")
        return self

    @property
    def start_count(self) -> int:
        if self.num_starts is not None:
            return self.num_starts
        nx, ny = self.grid_shape
        return nx * ny * self.candidates_per_point

    def translated(self, offset) -> "SolverConfig":
        dx, dy = offset
        x_min, x_max, y_min, y_max = self.init_position_region
        return self.model_copy(
            update={"init_position_region": (x_min + dx, x_max + dx, y_min + dy, y_max + dy)}
        )


@dataclass(frozen=True)
class StartResult:
    """
    Outcome of one start.

    ``objective`` is the Doppler misfit alone; ``penalty`` is the velocity
    smoothing term that was minimized with it. ``history`` holds their sum.
    """

    motion: MotionParams
    objective: float
    iterations: int
    converged: bool
    reason: str
    history: Tuple[float, ...] = ()
    penalty: float = 0.0

    @property
    def total(self) -> float:
        return self.objective + self.penalty


@dataclass(frozen=True)
class SolveResult:
    best: MotionParams
    objective: float
    per_start: List[StartResult]
    trajectory: Trajectory
    best_start: int
    ambiguous: bool = False
    seed: int = 0
    warnings: List[str] = field(default_factory=list)
    penalty: float = 0.0


def _smoothing_operator(k_count: int) -> np.ndarray:
    """``LᵀL ⊗ I₂`` for first differences of consecutive velocities."""
    if k_count < 2:
        return np.zeros((2 * k_count, 2 * k_count))
    diff = np.diff(np.eye(k_count), axis=0)
    return np.kron(diff.T @ diff, np.eye(2))


class _Problem:
    """Cost and normal equations of one solve, including the optional smoothing penalty."""

    def __init__(self, z: MeasurementSet, g: ScenarioGeometry, cfg: SolverConfig):
        self.z = z
        self.g = g
        self.weight = cfg.velocity_smoothing
        self.penalty = _smoothing_operator(z.num_instants) if self.weight > 0 else None

    def motion(self, x: np.ndarray) -> MotionParams:
        return MotionParams.from_vector(x, self.z.step)

    def terms(self, x: np.ndarray) -> Tuple[float, float]:
        """Doppler misfit and smoothing penalty at ``x``."""
        r = residuals(self.motion(x), self.z, self.g)
        smoothing = 0.0
        if self.penalty is not None:
            v = x[2:]
            smoothing = self.weight * float(v @ self.penalty @ v)
        return float(np.sum(r * r)), smoothing

    def cost(self, x: np.ndarray) -> float:
        return sum(self.terms(x))

    def linearize(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
        normal, gradient, value = normal_equations(self.motion(x), self.z, self.g)
        if self.penalty is not None:
            v = x[2:]
            normal[2:, 2:] += self.weight * self.penalty
            gradient[2:] += self.weight * (self.penalty @ v)
            value += self.weight * float(v @ self.penalty @ v)
        return normal, gradient, value


def dead_reckoning(
    initial_position: np.ndarray, z: MeasurementSet, g: ScenarioGeometry
) -> np.ndarray:
    """Per-instant least-squares velocities, walking forward from ``initial_position``."""
    position = np.asarray(initial_position, dtype=float).copy()
    velocities = np.zeros((z.num_instants, 2))
    for k in range(z.num_instants):
        try:
            d = doppler_matrix(g, position)
        except DegenerateGeometryError:
            continue
        velocities[k] = np.linalg.lstsq(d, z.z[k], rcond=None)[0]
        position += velocities[k] * z.step
    return velocities


def initial_guesses(
    z: MeasurementSet, g: ScenarioGeometry, cfg: SolverConfig
) -> List[np.ndarray]:
    """Stratified initial positions with jitter, plus their initial velocities."""
    rng = np.random.default_rng(cfg.seed)
    nx, ny = cfg.grid_shape
    x_min, x_max, y_min, y_max = cfg.init_position_region
    cell = np.array([(x_max - x_min) / nx, (y_max - y_min) / ny])
    origin = np.array([x_min, y_min])

    guesses = []
    for s in range(cfg.start_count):
        c = s % (nx * ny)
        index = np.array([c % nx, c // nx])
        p1 = origin + (index + rng.uniform(0.0, 1.0, size=2)) * cell
        if cfg.velocity_init == "random":
            velocities = rng.normal(0.0, cfg.init_velocity_scale, size=(z.num_instants, 2))
        else:
            velocities = dead_reckoning(p1, z, g)
        guesses.append(np.concatenate([p1, velocities.ravel()]))
    return guesses


def _levenberg_marquardt(problem: _Problem, x0: np.ndarray, cfg: SolverConfig) -> StartResult:
    x = np.asarray(x0, dtype=float)
    try:
        normal, gradient, cost = problem.linearize(x)
    except DegenerateGeometryError:
        return StartResult(problem.motion(x), float("inf"), 0, False, "degenerate")
    if not np.isfinite(cost):
        return StartResult(problem.motion(x), float("inf"), 0, False, "non-finite")

    scale = float(np.max(np.diag(normal))) or 1.0
    damping = cfg.damping_init * scale
    eye = np.eye(len(x))
    history = [cost]
    reason = "max_iters"
    iterations = 0

    while iterations < cfg.max_iters:
        if cost <= cfg.objective_floor:
            reason = "floor"
            break
        iterations += 1

        try:
            step = linalg.cho_solve(linalg.cho_factor(normal + damping * eye), -gradient)
        except linalg.LinAlgError:
            damping *= cfg.damping_up
            continue

        candidate = x + step
        try:
            candidate_cost = problem.cost(candidate)
        except DegenerateGeometryError:
            candidate_cost = float("inf")

        if candidate_cost < cost:
            decrease = (cost - candidate_cost) / cost
            x, cost = candidate, candidate_cost
            history.append(cost)
            damping *= cfg.damping_down
            logger.debug("iteration %d: objective %.6e damping %.3e", iterations, cost, damping)
            if decrease < cfg.convergence_tol:
                reason = "tolerance"
                break
            normal, gradient, cost = problem.linearize(x)
        else:
            damping *= cfg.damping_up
            if damping > DAMPING_CEILING * scale:
                reason = "stalled"
                break

    converged = reason in ("floor", "tolerance", "stalled")
    misfit, smoothing = problem.terms(x)
    return StartResult(
        problem.motion(x), misfit, iterations, converged, reason, tuple(history), smoothing
    )


def _is_ambiguous(results: List[StartResult], best: int, radius: float) -> bool:
    """True when a start far from the best p1 reaches within 1% of its objective."""
    best_result = results[best]
    order = sorted(range(len(results)), key=lambda s: (results[s].total, s))
    for s in order:
        other = results[s]
        if not np.isfinite(other.total):
            break
        distance = np.linalg.norm(other.motion.initial_position - best_result.motion.initial_position)
        if distance > radius:
            return other.total <= 1.01 * best_result.total
    return False


def solve(
    z: MeasurementSet,
    g: ScenarioGeometry,
    cfg: SolverConfig,
    initial: Optional[MotionParams] = None,
) -> SolveResult:
    """
    Reconstruct the motion parameters from the Doppler measurements.

    Parameters
    ----------
    z : MeasurementSet
        Smoothed Doppler tracks, K >= 2 instants.

    g : ScenarioGeometry

    cfg : SolverConfig

    initial : MotionParams, optional
        Warm start used as start 0 in place of the first drawn guess.

    Returns
    -------
    SolveResult
        The start with the lowest objective plus smoothing penalty (lowest
        index on ties) and every start's outcome.

    Raises
    ------
    SolverFailedError
        When no start reaches a finite objective.
    """
    if z.num_instants < 2:
        raise ValueError("at least two instants are needed to over-determine the motion")

    problem = _Problem(z, g, cfg)
    guesses = initial_guesses(z, g, cfg)
    if initial is not None:
        guesses[0] = initial.as_vector()

    results = []
    for s, x0 in enumerate(guesses):
        result = _levenberg_marquardt(problem, x0, cfg)
        logger.debug(
            "start %d: objective %.6e after %d iterations (%s)",
            s,
            result.objective,
            result.iterations,
            result.reason,
        )
        results.append(result)

    objectives = np.array([r.total for r in results])
    if not np.any(np.isfinite(objectives)):
        raise SolverFailedError(f"none of the {len(results)} starts reached a finite objective")

    best = int(np.argmin(objectives))
    ambiguous = _is_ambiguous(results, best, cfg.ambiguity_radius)
    warnings = []
    if ambiguous:
        message = (
            "a start whose initial position lies more than "
            f"{cfg.ambiguity_radius:g} m from the best one reaches an objective within 1%; "
            "the solution may be mirrored"
        )
        logger.warning(message)
        warnings.append(message)

    logger.info(
        "best start %d of %d: objective %.6e, smoothing penalty %.6e",
        best,
        len(results),
        results[best].objective,
        results[best].penalty,
    )
    return SolveResult(
        best=results[best].motion,
        objective=results[best].objective,
        penalty=results[best].penalty,
        per_start=results,
        trajectory=propagate(results[best].motion),
        best_start=best,
        ambiguous=ambiguous,
        seed=cfg.seed,
        warnings=warnings,
    )
