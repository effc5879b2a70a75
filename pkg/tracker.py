"""
Path tracking for straight-line homotopies on affine charts.

A Homotopy holds fixed equations, a moving segment t*A + (1-t)*B and one chart
equation H_i(x) = 1 per projective factor. Paths run from t=1 to t=0 with an
RK4 predictor on the Davidenko equation, a Newton corrector, adaptive steps and
a Cauchy endgame for singular endpoints.
"""

import logging
from dataclasses import replace
from multiprocessing import Pool, cpu_count
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from tqdm.auto import tqdm

import config
from exceptions import CycleExceeded, EndgameError, NonConvergent, StructuralError
from models import FailureReason, PathOutcome, PathStatus, TrackerSettings
from poly_core import PolynomialSystem, is_multihomogeneous, multidegree_of

logger = logging.getLogger(__name__)


# =============================================================================
# SQUARE SYSTEMS ON A CHART
# =============================================================================

class ChartSystem:
    """Equations plus the chart rows H_i(x) - 1; square when used for Newton."""

    def __init__(self, equations: PolynomialSystem, chart):
        self.equations = equations
        self.chart = chart

    @property
    def size(self) -> int:
        return len(self.equations) + self.chart.matrix.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate([self.equations.evaluate(x), self.chart.matrix @ x - 1.0])

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return np.vstack([self.equations.jacobian(x), self.chart.matrix])


class _FrozenHomotopy:
    """A homotopy with t held fixed."""

    def __init__(self, homotopy: "Homotopy", t: complex):
        self.homotopy = homotopy
        self.t = t
        self.chart = homotopy.chart

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.homotopy.evaluate(x, self.t)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return self.homotopy.jacobian(x, self.t)


class Homotopy:
    """
    H(x, t) = [fixed(x); gamma*t*start(x) + (1-t)*target(x); chart(x) - 1].

    Args:
        fixed: equations that hold along the whole path
        start: moving equations at t=1
        target: moving equations at t=0
        chart: object with a (k, N) ``matrix`` and ``normalize(x)``
        gamma: random complex constant keeping the path off the discriminant
    """

    def __init__(self, fixed: PolynomialSystem, start: PolynomialSystem,
                 target: PolynomialSystem, chart, gamma: complex = 1.0):
        if len(start) != len(target):
            raise StructuralError("start and target lists must have the same length")
        structure = fixed.structure
        for p, q in zip(start, target):
            if is_multihomogeneous(p) and is_multihomogeneous(q) and not (p.is_zero or q.is_zero):
                if multidegree_of(p) != multidegree_of(q):
                    raise StructuralError("start and target multidegrees differ")
        equations = len(fixed) + len(start) + chart.matrix.shape[0]
        if equations != structure.total:
            raise StructuralError(
                f"homotopy is not square: {equations} equations for {structure.total} variables"
            )
        self.fixed = fixed
        self.start = start
        self.target = target
        self.chart = chart
        self.structure = structure
        self.gamma = complex(gamma)
        self.is_identity = start == target

    def evaluate(self, x: np.ndarray, t: complex) -> np.ndarray:
        return np.concatenate([
            self.fixed.evaluate(x),
            self.gamma * t * self.start.evaluate(x) + (1 - t) * self.target.evaluate(x),
            self.chart.matrix @ x - 1.0,
        ])

    def jacobian(self, x: np.ndarray, t: complex) -> np.ndarray:
        return np.vstack([
            self.fixed.jacobian(x),
            self.gamma * t * self.start.jacobian(x) + (1 - t) * self.target.jacobian(x),
            self.chart.matrix,
        ])

    def dt(self, x: np.ndarray, t: complex) -> np.ndarray:
        """Partial derivative in t."""
        return np.concatenate([
            np.zeros(len(self.fixed), dtype=complex),
            self.gamma * self.start.evaluate(x) - self.target.evaluate(x),
            np.zeros(self.chart.matrix.shape[0], dtype=complex),
        ])

    def at(self, t: complex) -> _FrozenHomotopy:
        return _FrozenHomotopy(self, t)


# =============================================================================
# LINEAR ALGEBRA HELPERS
# =============================================================================

def _lu(matrix: np.ndarray):
    try:
        lu = scipy.linalg.lu_factor(matrix, check_finite=True)
    except (ValueError, scipy.linalg.LinAlgError):
        return None
    if not np.all(np.isfinite(lu[0])) or np.any(np.abs(np.diag(lu[0])) == 0):
        return None
    return lu


def _solve(lu, rhs: np.ndarray) -> Optional[np.ndarray]:
    out = scipy.linalg.lu_solve(lu, rhs)
    return out if np.all(np.isfinite(out)) else None


def condition_number(matrix: np.ndarray) -> float:
    """sigma_max / sigma_min (inf when singular)."""
    values = scipy.linalg.svdvals(matrix)
    if values.size == 0:
        return 1.0
    if values[-1] == 0:
        return float("inf")
    return float(values[0] / values[-1])


def is_full_rank(matrix: np.ndarray, rcond: float = config.RANK_RCOND) -> bool:
    return condition_number(matrix) < 1.0 / rcond


def _estimate_condition(matrix: np.ndarray, lu) -> float:
    # one inverse power iteration for 1/sigma_min
    n = matrix.shape[0]
    v = np.ones(n, dtype=complex) / np.sqrt(n)
    w = scipy.linalg.lu_solve(lu, v)
    norm = np.linalg.norm(w)
    if not np.isfinite(norm) or norm == 0:
        return float("inf")
    w = scipy.linalg.lu_solve(lu, w / norm)
    return float(np.linalg.norm(matrix) * np.linalg.norm(w))


# =============================================================================
# NEWTON
# =============================================================================

def newton_polish(system, point, tol: float, max_iter: int = 8) -> Tuple[np.ndarray, bool]:
    """
    Newton's method on a square system (anything with evaluate/jacobian).

    Returns the polished point and whether it converged: residual <= tol
    (scaled by max(1, |x|)) with steps that kept contracting.
    """
    x = np.array(point, dtype=complex)
    f = system.evaluate(x)
    if np.max(np.abs(f), initial=0.0) <= tol * max(1.0, np.max(np.abs(x), initial=0.0)):
        return x, True
    previous = None
    for _ in range(max_iter):
        lu = _lu(system.jacobian(x))
        if lu is None:
            return x, False
        dx = _solve(lu, f)
        if dx is None:
            return x, False
        step = np.linalg.norm(dx, np.inf)
        if previous is not None and step > 0.5 * previous and step > tol:
            return x, False
        x = x - dx
        f = system.evaluate(x)
        scale = max(1.0, np.max(np.abs(x)))
        if np.max(np.abs(f)) <= tol * scale and step <= np.sqrt(tol) * scale:
            return x, True
        previous = step
    return x, False


def _correct(h: Homotopy, x: np.ndarray, t: complex, settings: TrackerSettings):
    """Newton corrector at fixed t; returns (point, ok, lu, jacobian)."""
    previous = None
    for _ in range(settings.newton_iterations_max):
        J = h.jacobian(x, t)
        lu = _lu(J)
        if lu is None:
            return x, False, None, J
        dx = _solve(lu, h.evaluate(x, t))
        if dx is None:
            return x, False, None, J
        x = x - dx
        step = np.linalg.norm(dx, np.inf)
        if step <= settings.tol_track * max(1.0, np.linalg.norm(x, np.inf)):
            return x, True, lu, J
        if previous is not None and step > 0.5 * previous:
            return x, False, None, J
        previous = step
    return x, False, None, None


def is_locally_isolated(system, point, rng, step: float = config.LOCAL_DIM_STEP,
                        trials: int = 2) -> bool:
    """
    Whether point is an isolated zero of system, possibly a singular one.

    The point is shifted by step along a kernel direction of the Jacobian and
    cut with one random hyperplane through the shifted point. Gauss-Newton on
    the equations plus that hyperplane reaches an exact zero near point only
    when the zero set runs through point in that direction.

    Args:
        system: anything with evaluate/jacobian, usually a ChartSystem
        point: zero of system to classify
        rng: SeededRNG for the directions and hyperplanes
        step: distance of the shifted start from point
        trials: shifted starts tried before calling the point isolated

    Points of very high multiplicity look like curves at this scale.
    """
    x = np.asarray(point, dtype=complex)
    J = system.jacobian(x)
    _, s, vh = scipy.linalg.svd(J)
    rank = int(np.sum(s > config.RANK_RCOND * s[0])) if s.size and s[0] > 0 else 0
    kernel = vh[rank:].conj()
    if kernel.shape[0] == 0:
        return True
    scale = max(1.0, np.linalg.norm(x, np.inf))
    for _ in range(trials):
        direction = rng.random_complex(kernel.shape[0]) @ kernel
        shifted = x + step * direction / np.linalg.norm(direction, np.inf)
        a = rng.random_complex(x.size)
        level = a @ shifted
        y = shifted
        for _ in range(config.LOCAL_DIM_ITERATIONS):
            f = np.append(system.evaluate(y), a @ y - level)
            dy = scipy.linalg.lstsq(np.vstack([system.jacobian(y), a]), f)[0]
            y = y - dy
            if not np.all(np.isfinite(y)) or np.linalg.norm(dy, np.inf) <= 1e-15 * scale:
                break
        if not np.all(np.isfinite(y)):
            continue
        residual = np.max(np.abs(np.append(system.evaluate(y), a @ y - level)))
        distance = np.linalg.norm(y - x, np.inf)
        if residual <= config.LOCAL_DIM_TOL * scale and step / 10 < distance < 100 * step:
            logger.debug("zero set passes %.3g from the point; not isolated", distance)
            return False
    return True


# =============================================================================
# PREDICTOR-CORRECTOR CORE
# =============================================================================

class _Leg:
    """A path in the t plane parametrised by arclength-like s in [0, length]."""

    def __init__(self, t_of: Callable[[float], complex], dt_ds: Callable[[float], complex], length: float):
        self.t_of = t_of
        self.dt_ds = dt_ds
        self.length = length

    @classmethod
    def straight(cls, t_from: complex, t_to: complex) -> "_Leg":
        length = abs(t_to - t_from)
        direction = (t_to - t_from) / length if length else 0.0
        return cls(lambda s: t_from + s * direction, lambda s: direction, length)

    @classmethod
    def arc(cls, radius: float, theta_from: float, theta_to: float) -> "_Leg":
        t_of = lambda s: radius * np.exp(1j * (theta_from + s))
        return cls(t_of, lambda s: 1j * t_of(s), theta_to - theta_from)


def _velocity(h: Homotopy, x: np.ndarray, leg: _Leg, s: float) -> Optional[np.ndarray]:
    t = leg.t_of(s)
    lu = _lu(h.jacobian(x, t))
    if lu is None:
        return None
    return _solve(lu, -h.dt(x, t) * leg.dt_ds(s))


def _rk4(h: Homotopy, x: np.ndarray, leg: _Leg, s: float, ds: float) -> Optional[np.ndarray]:
    k1 = _velocity(h, x, leg, s)
    if k1 is None:
        return None
    k2 = _velocity(h, x + 0.5 * ds * k1, leg, s + 0.5 * ds)
    if k2 is None:
        return None
    k3 = _velocity(h, x + 0.5 * ds * k2, leg, s + 0.5 * ds)
    if k3 is None:
        return None
    k4 = _velocity(h, x + ds * k3, leg, s + ds)
    if k4 is None:
        return None
    return x + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _track_leg(h: Homotopy, x: np.ndarray, leg: _Leg, settings: TrackerSettings,
               step_max: Optional[float] = None):
    """Returns (point, failure reason or None, steps taken, last condition estimate)."""
    step_max = step_max or settings.step_max
    s = 0.0
    step = min(settings.step_initial, step_max)
    successes = 0
    steps = 0
    condition = 1.0
    while leg.length - s > 1e-15 * max(1.0, leg.length):
        if steps >= settings.max_steps:
            return x, FailureReason.MAX_STEPS, steps, condition
        steps += 1
        ds = min(step, leg.length - s)
        predicted = _rk4(h, x, leg, s, ds)
        ok = False
        if predicted is not None and np.all(np.isfinite(predicted)):
            corrected, ok, lu, J = _correct(h, predicted, leg.t_of(s + ds), settings)
        if not ok:
            successes = 0
            step = ds / 2.0
            if step < settings.step_min:
                return x, FailureReason.STEP_MIN, steps, condition
            continue
        try:
            corrected = h.chart.normalize(corrected)
        except ValueError:
            return x, FailureReason.DIVERGING, steps, condition
        if np.linalg.norm(corrected, np.inf) > settings.divergence_norm:
            return corrected, FailureReason.DIVERGING, steps, condition
        condition = _estimate_condition(J, lu)
        if condition > settings.condition_max:
            return corrected, FailureReason.ILL_CONDITIONED, steps, condition
        x = corrected
        s += ds
        successes += 1
        if successes >= settings.step_growth_after:
            step = min(step * settings.step_growth, step_max)
            successes = 0
    return x, None, steps, condition


def track_segment(h: Homotopy, x, t_from: complex, t_to: complex, settings: TrackerSettings):
    """
    Track from t_from to t_to along the straight segment between them.

    Returns:
        (point, failure reason or None, steps)
    """
    x = np.asarray(x, dtype=complex)
    if t_from == t_to:
        return x, None, 0
    point, reason, steps, _ = _track_leg(h, x, _Leg.straight(t_from, t_to), settings)
    return point, reason, steps


# =============================================================================
# ENDGAME
# =============================================================================

def _same_point(p: np.ndarray, q: np.ndarray, tol: float) -> bool:
    return np.linalg.norm(p - q, np.inf) <= tol * max(1.0, np.linalg.norm(p, np.inf))


def _loop_samples(h: Homotopy, x: np.ndarray, radius: float, settings: TrackerSettings):
    """Walk around |t| = radius until the path returns; returns (samples, cycle number)."""
    nodes = settings.endgame_samples_per_loop
    arc = 2.0 * np.pi / nodes
    samples = []
    current = x
    for cycle in range(1, settings.endgame_cycle_max + 1):
        for m in range(nodes):
            samples.append(current)
            leg = _Leg.arc(radius, m * arc, (m + 1) * arc)
            current, reason, _, _ = _track_leg(h, current, leg, settings, step_max=arc)
            if reason is not None:
                raise NonConvergent(f"circle tracking failed ({reason.value}) at radius {radius:.3g}")
        if _same_point(current, x, max(1e-6, 100 * settings.tol_track)):
            return samples, cycle
    raise CycleExceeded(f"path did not close within {settings.endgame_cycle_max} loops")


def cauchy_endgame(h: Homotopy, point_at_t0, settings: TrackerSettings,
                   t0: Optional[float] = None) -> Tuple[np.ndarray, int]:
    """
    Estimate the endpoint at t=0 from loops around the origin.

    Args:
        h: homotopy
        point_at_t0: path point at t = t0 (default settings.endgame_start)
        settings: tracker settings

    Returns:
        (endpoint estimate, cycle number)

    Raises:
        CycleExceeded: a loop did not close within endgame_cycle_max turns
        NonConvergent: estimates at successive radii never agreed
    """
    radius = float(t0 if t0 is not None else settings.endgame_start)
    x = np.asarray(point_at_t0, dtype=complex)
    previous = None
    for level in range(settings.endgame_radius_levels):
        samples, cycle = _loop_samples(h, x, radius, settings)
        estimate = h.chart.normalize(np.mean(samples, axis=0))
        if previous is not None and _same_point(estimate, previous, 10 * settings.tol_final):
            logger.debug("endgame converged at radius %.3g, cycle %d", radius, cycle)
            return estimate, cycle
        previous = estimate
        inner = radius * settings.endgame_radius_ratio
        x, reason, _ = track_segment(h, x, radius, inner, settings)
        if reason is not None:
            raise NonConvergent(f"could not shrink radius below {radius:.3g}")
        radius = inner
    raise NonConvergent("Cauchy estimates did not settle")


# =============================================================================
# PATHS
# =============================================================================

def _finish(h: Homotopy, x: np.ndarray, settings: TrackerSettings, steps: int,
            cycle: int) -> PathOutcome:
    """Polish at t=0 and classify as success or singular."""
    target = h.at(0.0)
    polished, converged = newton_polish(target, x, settings.tol_final)
    if converged:
        condition = condition_number(target.jacobian(polished))
        if condition < config.SINGULAR_CONDITION:
            residual = float(np.max(np.abs(target.evaluate(polished)), initial=0.0))
            return PathOutcome(h.chart.normalize(polished), PathStatus.SUCCESS, residual,
                               condition, steps, 1)
    residual = float(np.max(np.abs(target.evaluate(x)), initial=0.0))
    condition = condition_number(target.jacobian(x))
    return PathOutcome(x, PathStatus.SINGULAR, residual, condition, steps, cycle)


def track_path(h: Homotopy, start, settings: TrackerSettings) -> PathOutcome:
    """
    Track one path from t=1 to t=0.

    Numerical failures come back as PathOutcome(status=FAILURE); this never
    raises for a bad path.
    """
    x = np.asarray(start, dtype=complex)
    x, ok = newton_polish(h.at(1.0), x, settings.tol_track, settings.newton_iterations_max)
    if not ok:
        return PathOutcome(x, PathStatus.FAILURE, reason=FailureReason.START_NEWTON)
    if h.is_identity:
        return _finish(h, x, settings, 0, 1)

    x, reason, steps = track_segment(h, x, 1.0, settings.endgame_start, settings)
    if reason is not None:
        return PathOutcome(x, PathStatus.FAILURE, steps=steps, reason=reason)

    straight, reason, more = track_segment(h, x, settings.endgame_start, 0.0, settings)
    if reason is None:
        outcome = _finish(h, straight, settings, steps + more, 1)
        if outcome.success:
            return outcome

    try:
        endpoint, cycle = cauchy_endgame(h, x, settings)
    except EndgameError as exc:
        logger.debug("endgame fell back to straight tracking: %s", exc)
        tight = replace(settings, tol_track=settings.tol_track / 100)
        fallback, reason, more = track_segment(h, x, settings.endgame_start, config.ENDGAME_FALLBACK_T, tight)
        if reason is not None:
            return PathOutcome(fallback, PathStatus.FAILURE, steps=steps + more,
                               reason=FailureReason.ENDGAME)
        residual = float(np.max(np.abs(h.at(0.0).evaluate(fallback)), initial=0.0))
        return PathOutcome(fallback, PathStatus.SINGULAR, residual, float("inf"), steps + more, 0)
    return _finish(h, endpoint, settings, steps, cycle)


def sample_path(h: Homotopy, start, t_samples: Sequence[float],
                settings: TrackerSettings) -> List[Optional[np.ndarray]]:
    """
    Points of one path at each t in t_samples (nonincreasing, starting at or below 1).

    Each sample is Newton-polished at its t and chart-normalized. Once the
    path fails, that sample and every later one are None.
    """
    x, ok = newton_polish(h.at(1.0), np.asarray(start, dtype=complex), settings.tol_track,
                          settings.newton_iterations_max)
    samples: List[Optional[np.ndarray]] = []
    t_prev = 1.0
    for t in t_samples:
        if ok:
            x, reason, _ = track_segment(h, x, t_prev, t, settings)
            ok = reason is None
        if ok:
            x, ok = newton_polish(h.at(t), x, settings.tol_final)
        if ok:
            try:
                x = h.chart.normalize(x)
            except ValueError:
                ok = False
        samples.append(x.copy() if ok else None)
        t_prev = t
    return samples


def _track_worker(args):
    """Top-level so multiprocessing can pickle it."""
    h, start, settings = args
    return track_path(h, start, settings)


def _sample_worker(args):
    h, start, t_samples, settings = args
    return sample_path(h, start, t_samples, settings)


def _run_batch(worker, tasks: list, settings: TrackerSettings, desc: str) -> list:
    """Map worker over tasks, in a process pool when settings.workers > 1; keeps order."""
    if not tasks:
        return []
    workers = min(settings.workers, cpu_count(), len(tasks))
    progress = dict(total=len(tasks), desc=desc, disable=not settings.show_progress)
    if workers > 1:
        chunksize = max(1, len(tasks) // (4 * workers))
        with Pool(processes=workers) as pool:
            return list(tqdm(pool.imap(worker, tasks, chunksize=chunksize), **progress))
    return [worker(task) for task in tqdm(tasks, **progress)]


def track_all(h: Homotopy, starts: Sequence, settings: TrackerSettings) -> List[PathOutcome]:
    """
    Track every start point; element j is track_path(h, starts[j], settings).

    Uses a process pool when settings.workers > 1. Results keep input order.
    """
    outcomes = _run_batch(_track_worker, [(h, s, settings) for s in starts], settings,
                          "Tracking paths")
    failures = sum(1 for o in outcomes if o.failed)
    if failures:
        logger.warning("%d of %d paths failed", failures, len(outcomes))
    return outcomes


def sample_all(h: Homotopy, starts: Sequence, t_samples: Sequence[float],
               settings: TrackerSettings) -> List[List[Optional[np.ndarray]]]:
    """sample_path for every start point, in input order."""
    tasks = [(h, s, tuple(t_samples), settings) for s in starts]
    return _run_batch(_sample_worker, tasks, settings, "Sampling paths")
