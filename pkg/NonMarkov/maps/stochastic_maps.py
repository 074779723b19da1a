"""
    Probability vectors, stochastic matrices and time-local generators on N sites.

    Column convention throughout: probability vectors are columns,
    p(t) = Lambda(t, 0) p(0), and every column of a stochastic matrix sums to 1.
    Generators act as dp/dt = L(t) p(t) and have zero column sums.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from NonMarkov.errors import NumericalError, ValidationError
from NonMarkov.settings import (CONSERVATION_TOL, DIFF_STEP_FACTOR, GENERATOR_COLUMN_TOL, MAX_CONDITION_NUMBER,
                                ODE_ATOL, ODE_RTOL, RENORMALIZATION_DRIFT, STOCHASTIC_TOL)

__all__ = ["as_probability_vector", "as_stochastic_matrix", "is_stochastic", "kolmogorov_distance", "apply",
           "MapFamily", "generator_from_maps", "KolmogorovWitness", "kolmogorov_conditions", "w_rates",
           "generator_from_w", "DivisibilityViolation", "PDivisibilityReport", "p_divisibility_check",
           "Trajectory", "propagate", "propagate_maps"]

logger = logging.getLogger(__name__)

PROBABILITY_SUM_TOL = 1e-12


def as_probability_vector(p, tol: float = STOCHASTIC_TOL) -> np.ndarray:
    '''
    Checks that p lies on the probability simplex and returns it as a float
    array. Entries in [-tol, 0) are clamped to 0.
    '''
    p = np.array(p, dtype=float)
    if p.ndim != 1 or len(p) == 0:
        raise ValidationError("probability vector must be a nonempty 1-d array")
    if np.any(p < -tol) or not np.all(np.isfinite(p)):
        raise ValidationError(f"probability vector has a negative entry {p.min():.3g}")
    if abs(p.sum() - 1.0) > PROBABILITY_SUM_TOL * len(p):
        raise ValidationError(f"probabilities sum to {p.sum():.15g}")
    if np.any(p < 0):
        logger.debug("clamping %d slightly negative probabilities", int(np.sum(p < 0)))
        p[p < 0] = 0.0
    return p


def as_stochastic_matrix(m, tol: float = STOCHASTIC_TOL) -> np.ndarray:
    '''
    Checks the conditions (Lambda)_jk >= 0 and sum_j (Lambda)_jk = 1 within
    tol and returns the matrix with entries in [-tol, 0) clamped to 0.
    '''
    m = np.array(m, dtype=float)
    violation = __stochastic_violation(m, tol)
    if violation:
        raise ValidationError(violation)
    if np.any(m < 0):
        logger.debug("clamping %d slightly negative matrix entries", int(np.sum(m < 0)))
        m[m < 0] = 0.0
    return m


def is_stochastic(m, tol: float = STOCHASTIC_TOL) -> bool:
    return __stochastic_violation(np.asarray(m, dtype=float), tol) is None


def __stochastic_violation(m: np.ndarray, tol: float) -> Optional[str]:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return "stochastic matrix must be square"
    if not np.all(np.isfinite(m)):
        return "stochastic matrix has non-finite entries"
    if np.any(m < -tol):
        j, k = np.unravel_index(np.argmin(m), m.shape)
        return f"negative entry {m[j, k]:.3g} at ({j}, {k})"
    sums = m.sum(axis=0)
    if np.any(np.abs(sums - 1.0) > tol):
        k = int(np.argmax(np.abs(sums - 1.0)))
        return f"column {k} sums to {sums[k]:.12g}"
    return None


def kolmogorov_distance(p1, p2) -> float:
    """D_K(p1, p2) = 1/2 sum_k |p1_k - p2_k|."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape != p2.shape:
        raise ValidationError(f"dimension mismatch: {p1.shape} vs {p2.shape}")
    return 0.5 * float(np.abs(p1 - p2).sum())


def apply(m, p) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    p = as_probability_vector(p)
    if m.shape != (len(p), len(p)):
        raise ValidationError(f"dimension mismatch: matrix {m.shape}, vector {p.shape}")
    return m @ p


@dataclass(frozen=True)
class MapFamily:
    '''
    One-parameter family of dynamical maps t -> Lambda(t, 0) on [0, t_max].

    Parameters:
        evaluator:
            Reentrant callable returning the N x N map at t; assumed
            piecewise smooth so it can be differentiated numerically.
        time_scale:
            Slowest time constant of the family, sets the differentiation step.
        batch:
            Optional vectorized evaluator returning a (len(times), N, N) stack.
    '''
    evaluator: Callable[[float], np.ndarray]
    t_max: float
    dimension: int
    time_scale: float = 1.0
    batch: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    description: str = ""

    def __post_init__(self):
        identity = np.asarray(self.evaluator(0.0), dtype=float)
        if identity.shape != (self.dimension, self.dimension):
            raise ValidationError(f"map family returns shape {identity.shape}, expected "
                                  f"({self.dimension}, {self.dimension})")
        if np.max(np.abs(identity - np.eye(self.dimension))) > STOCHASTIC_TOL:
            raise ValidationError("map family must start at the identity")

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.evaluator(t), dtype=float)

    def on_grid(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        if self.batch is not None:
            return np.asarray(self.batch(times), dtype=float)
        return np.stack([self(t) for t in times])


def __invertible(m: np.ndarray) -> bool:
    return np.linalg.cond(m) < MAX_CONDITION_NUMBER


def generator_from_maps(fam: MapFamily, t: float, h: Optional[float] = None) -> np.ndarray:
    '''
    L(t) = (d Lambda(t, 0)/dt) Lambda(t, 0)^-1.

    The derivative is a central difference with step h (default
    DIFF_STEP_FACTOR times the family's time scale), Richardson extrapolated
    once; closer than h to t = 0 one-sided differences are used instead.

    Raises:
        NumericalError "map not invertible at t" when the condition number of
        Lambda(t, 0) reaches MAX_CONDITION_NUMBER.
    '''
    if h is None:
        h = DIFF_STEP_FACTOR * fam.time_scale
    if not h > 0:
        raise ValidationError("differentiation step must be positive")
    if t < 0:
        raise ValidationError("negative time")

    current = fam(t)
    if not __invertible(current):
        raise NumericalError(f"map not invertible at t={t:.12g}")

    if t >= h:
        central = lambda step: (fam(t + step) - fam(t - step)) / (2.0 * step)
        derivative = (4.0 * central(h / 2.0) - central(h)) / 3.0
    else:
        forward = lambda step: (fam(t + step) - current) / step
        derivative = 2.0 * forward(h / 2.0) - forward(h)

    generator = np.linalg.solve(current.T, derivative.T).T
    residual = float(np.max(np.abs(generator.sum(axis=0))))
    if residual > GENERATOR_COLUMN_TOL:
        logger.warning("generator at t=%.6g has column sum residual %.3g", t, residual)
    else:
        logger.debug("generator at t=%.6g, column sum residual %.3g", t, residual)
    return generator


@dataclass(frozen=True)
class KolmogorovWitness:
    """First entry of a generator violating the Kolmogorov conditions."""
    row: Optional[int]
    column: int
    value: float
    reason: str


def kolmogorov_conditions(L, tol: float = STOCHASTIC_TOL) -> Tuple[bool, Optional[KolmogorovWitness]]:
    '''
    Checks (L)_jk >= 0 for j != k, (L)_kk <= 0 and sum_j (L)_jk = 0, all
    within tol.

    Returns:
        (True, None) or (False, witness) for the first violation in row-major
        order, column sums checked last.
    '''
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    for j in range(n):
        for k in range(n):
            if j != k and L[j, k] < -tol:
                return False, KolmogorovWitness(j, k, float(L[j, k]), "negative off-diagonal rate")
            if j == k and L[j, k] > tol:
                return False, KolmogorovWitness(j, k, float(L[j, k]), "positive diagonal entry")
    sums = L.sum(axis=0)
    for k in range(n):
        if abs(sums[k]) > tol:
            return False, KolmogorovWitness(None, k, float(sums[k]), "column sum not zero")
    return True, None


def w_rates(L, tol: float = GENERATOR_COLUMN_TOL) -> np.ndarray:
    '''
    Transition rates W of the Pauli form
    (L)_jk = W_jk - delta_jk sum_l W_lk, i.e. the off-diagonal part of L.
    A negative W_jk means P-divisibility is violated.
    '''
    L = np.asarray(L, dtype=float)
    scale = max(1.0, float(np.max(np.abs(L)))) if L.size else 1.0
    if np.any(np.abs(L.sum(axis=0)) > tol * scale):
        raise ValidationError("generator does not conserve probability: nonzero column sums")
    W = L.copy()
    np.fill_diagonal(W, 0.0)
    return W


def generator_from_w(W) -> np.ndarray:
    W = np.array(W, dtype=float)
    np.fill_diagonal(W, 0.0)
    return W - np.diag(W.sum(axis=0))


@dataclass(frozen=True)
class DivisibilityViolation:
    s: float
    t: float
    most_negative: float
    row: int
    column: int


@dataclass
class PDivisibilityReport:
    violations: List[DivisibilityViolation]
    indeterminate: List[float]
    resolution: float

    @property
    def p_divisible(self) -> bool:
        return not self.violations


def p_divisibility_check(fam: MapFamily, grid, tol: float = STOCHASTIC_TOL) -> PDivisibilityReport:
    '''
    Forms the intermediate maps Lambda(t, s) = Lambda(t, 0) Lambda(s, 0)^-1 for
    every adjacent pair s < t of the grid and tests them for stochasticity.

    Since Lambda(t, s) = Lambda(t, r) Lambda(r, s), adjacent pairs are enough
    up to the grid resolution, which the report carries. Points where
    Lambda(s, 0) is not invertible are reported as indeterminate.
    '''
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be strictly increasing with at least two points")
    maps = fam.on_grid(grid)

    violations, indeterminate = [], []
    for i in range(len(grid) - 1):
        earlier, later = maps[i], maps[i + 1]
        if not __invertible(earlier):
            indeterminate.append(float(grid[i]))
            continue
        intermediate = np.linalg.solve(earlier.T, later.T).T
        if is_stochastic(intermediate, tol):
            continue
        j, k = np.unravel_index(np.argmin(intermediate), intermediate.shape)
        violations.append(DivisibilityViolation(float(grid[i]), float(grid[i + 1]),
                                                float(intermediate[j, k]), int(j), int(k)))

    logger.debug("P-divisibility check: %d violations, %d indeterminate points on %d pairs",
                 len(violations), len(indeterminate), len(grid) - 1)
    return PDivisibilityReport(violations, indeterminate, float(np.max(np.diff(grid))))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    probabilities: np.ndarray  # shape (len(times), N)


def propagate(L: Callable[[float], np.ndarray], p0, t_end: float, points: int = 201,
              t_eval=None) -> Trajectory:
    '''
    Integrates dp/dt = L(t) p(t) from p(0) = p0 with an embedded Runge-Kutta
    4(5) pair (Dormand-Prince) at relative tolerance ODE_RTOL.

    Parameters:
        L:
            Callable t -> N x N generator.
        p0:
            Initial probability vector.
        t_end:
            Final time.
        points:
            Number of equally spaced output times, unless t_eval is given.
    Returns:
        Trajectory with the probability vectors renormalized to sum 1.
    '''
    p0 = as_probability_vector(p0)
    if t_end < 0:
        raise ValidationError("negative time")
    times = np.linspace(0.0, t_end, points) if t_eval is None else np.asarray(t_eval, dtype=float)
    if t_end == 0:
        return Trajectory(np.zeros(1), p0[None, :].copy())

    solution = solve_ivp(lambda t, p: np.asarray(L(t), dtype=float) @ p, (0.0, t_end), p0,
                         method="RK45", t_eval=times, rtol=ODE_RTOL, atol=ODE_ATOL)
    if not solution.success:
        raise NumericalError(f"stiff or singular generator: {solution.message}")

    probabilities = solution.y.T
    sums = probabilities.sum(axis=1)
    drift = float(np.max(np.abs(sums - 1.0)))
    if drift > RENORMALIZATION_DRIFT:
        logger.warning("probability drift %.3g during propagation", drift)
    else:
        logger.debug("renormalizing probability drift %.3g", drift)
    return Trajectory(solution.t, probabilities / sums[:, None])


def propagate_maps(L: Callable[[float], np.ndarray], dimension: int, t_end: float,
                   description: str = "propagated maps") -> MapFamily:
    '''
    Dynamical maps of a time-local generator: integrates
    d Lambda/dt = L(t) Lambda, Lambda(0) = 1, on [0, t_end] and returns the
    family backed by the dense output of the solver.
    '''
    if not t_end > 0:
        raise ValidationError("t_end must be positive")
    n = dimension
    solution = solve_ivp(lambda t, x: (np.asarray(L(t), dtype=float) @ x.reshape(n, n)).ravel(),
                         (0.0, t_end), np.eye(n).ravel(), method="RK45", dense_output=True,
                         rtol=ODE_RTOL, atol=ODE_ATOL)
    if not solution.success:
        raise NumericalError(f"stiff or singular generator: {solution.message}")

    def evaluator(t: float) -> np.ndarray:
        if t == 0:
            return np.eye(n)
        maps = solution.sol(min(max(t, 0.0), t_end)).reshape(n, n)
        if np.max(np.abs(maps.sum(axis=0) - 1.0)) > CONSERVATION_TOL:
            logger.debug("propagated map at t=%.6g drifts from column sum 1", t)
        return maps

    def batch(times: np.ndarray) -> np.ndarray:
        maps = solution.sol(np.clip(times, 0.0, t_end)).T.reshape(len(times), n, n)
        maps[times == 0] = np.eye(n)
        return maps

    return MapFamily(evaluator=evaluator, t_max=t_end, dimension=n, batch=batch, description=description)
