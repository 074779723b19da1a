"""
    Two-site model with time dependent rates,

        dp1/dt = gamma2(t) p2 - gamma1(t) p1
        dp2/dt = gamma1(t) p1 - gamma2(t) p2

    whose Kolmogorov distance decays monotonically,
    D_K(t) = exp(-int_0^t (gamma1 + gamma2)) D_K(0), while a negative gamma2
    breaks P-divisibility. The two memory signatures are therefore not
    equivalent in general.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate

from NonMarkov.counterexample.rate_functions import RateFunction, parse_rate
from NonMarkov.errors import NumericalError, ValidationError
from NonMarkov.maps.stochastic_maps import (KolmogorovWitness, kolmogorov_conditions, kolmogorov_distance,
                                            propagate, propagate_maps, w_rates)
from NonMarkov.measure.nonmarkov_measure import n_c_general
from NonMarkov.settings import (ANALYTIC_QUAD_AGREEMENT, DEFAULT_GAMMA1, DEFAULT_GAMMA2, JSON_SCHEMA_VERSION,
                                POINTS_PER_PERIOD, QUAD_TOL, STOCHASTIC_TOL)

__all__ = ["TwoRateModel", "ModelValidation", "NegativeRateWitness", "DemonstrationReport", "default_model",
           "condition_grid", "validate_model", "integrated_rate", "dk_closed_form", "demonstrate"]

logger = logging.getLogger(__name__)

NOT_A_COUNTEREXAMPLE = "not a counterexample: γ₂ never negative"
MONOTONE_SLACK = 1e-12
CLOSED_FORM_AGREEMENT = 1e-7
TRAJECTORY_POINTS = 401
GENERAL_GRID_POINTS = 1001


@dataclass(frozen=True)
class TwoRateModel:
    gamma1: RateFunction
    gamma2: RateFunction

    def generator(self, t: float) -> np.ndarray:
        g1, g2 = self.gamma1(t), self.gamma2(t)
        return np.array([[-g1, g2], [g1, -g2]])

    @property
    def period(self) -> Optional[float]:
        periods = [rate.period for rate in (self.gamma1, self.gamma2) if rate.period is not None]
        return min(periods) if periods else None

    def describe(self) -> dict:
        return {"gamma1": self.gamma1.describe(), "gamma2": self.gamma2.describe()}


def default_model() -> TwoRateModel:
    """gamma1 = 1, gamma2(t) = cos t + 0.9."""
    return TwoRateModel(parse_rate(DEFAULT_GAMMA1), parse_rate(DEFAULT_GAMMA2))


@dataclass
class ModelValidation:
    violations: List[str]
    flags: List[str]
    is_counterexample: bool

    @property
    def ok(self) -> bool:
        return not self.violations


def condition_grid(m: TwoRateModel, t_end: float) -> np.ndarray:
    '''
    Grid certifying the pointwise conditions: POINTS_PER_PERIOD points per
    period of the fastest sinusoid, and the table times of tabulated rates.
    '''
    period = m.period
    periods = t_end / period if period else 1.0
    grid = np.linspace(0.0, t_end, int(math.ceil(max(periods, 1.0) * POINTS_PER_PERIOD)) + 1)
    for rate in (m.gamma1, m.gamma2):
        times = getattr(rate, "times", None)
        if times is not None:
            grid = np.union1d(grid, times[(times >= 0) & (times <= t_end)])
    return grid


def validate_model(m: TwoRateModel, grid=None, t_end: Optional[float] = None) -> ModelValidation:
    '''
    Checks gamma1 >= 0, gamma1 + gamma2 >= 0 and int_0^t gamma2 >= 0 on the
    grid, propagates both vertices to check that the probabilities stay
    non-negative, and flags models in which gamma2 never turns negative.

    The integral condition is necessary but not sufficient: positivity needs
    int_0^t gamma2(s) exp(int_0^s (gamma1 + gamma2)) ds >= 0, which the
    propagation checks directly.

    The integral is a cumulative Simpson quadrature on the grid; when the rate
    has a closed form integral the two must agree within
    ANALYTIC_QUAD_AGREEMENT.
    '''
    if grid is None:
        grid = condition_grid(m, t_end if t_end is not None else 4.0 * math.pi)
    grid = np.asarray(grid, dtype=float)
    g1 = np.asarray(m.gamma1(grid), dtype=float)
    g2 = np.asarray(m.gamma2(grid), dtype=float)

    violations, flags = [], []
    if np.any(g1 < -STOCHASTIC_TOL):
        violations.append(f"γ₁ < 0 at t ≈ {grid[np.argmin(g1)]:.2g}")
    if np.any(g1 + g2 < -STOCHASTIC_TOL):
        violations.append(f"γ₁ + γ₂ < 0 at t ≈ {grid[np.argmin(g1 + g2)]:.2g}")

    integral = integrate.cumulative_simpson(g2, x=grid, initial=0.0)
    exact = m.gamma2.integral(grid)
    if exact is not None:
        disagreement = float(np.max(np.abs(integral - exact)))
        if disagreement > ANALYTIC_QUAD_AGREEMENT:
            violations.append(f"quadrature of γ₂ disagrees with its closed form by {disagreement:.3g}")
        integral = exact
    if np.any(integral < -QUAD_TOL):
        violations.append(f"∫γ₂ < 0 at t ≈ {grid[np.argmin(integral)]:.2g}")
    violations.extend(__positivity_violations(m, grid))

    is_counterexample = bool(np.any(g2 < 0))
    if not is_counterexample:
        flags.append(NOT_A_COUNTEREXAMPLE)
    return ModelValidation(violations, flags, is_counterexample)


def __positivity_violations(m: TwoRateModel, grid: np.ndarray) -> List[str]:
    if grid[-1] <= 0:
        return []
    lowest, at = np.inf, 0.0
    for vertex in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        trajectory = propagate(m.generator, vertex, float(grid[-1]), t_eval=grid)
        row = int(np.argmin(trajectory.probabilities.min(axis=1)))
        if trajectory.probabilities[row].min() < lowest:
            lowest, at = float(trajectory.probabilities[row].min()), float(trajectory.times[row])
    if lowest < -STOCHASTIC_TOL:
        return [f"positivity lost: p < 0 at t ≈ {at:.2g}"]
    return []


def integrated_rate(m: TwoRateModel, t: float) -> float:
    """int_0^t (gamma1 + gamma2) by adaptive quadrature."""
    if t == 0:
        return 0.0
    limit = 50 + int(10 * t / m.period) if m.period else 50
    value, _ = integrate.quad(lambda s: m.gamma1(s) + m.gamma2(s), 0.0, t,
                              epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=limit)
    return value


def dk_closed_form(m: TwoRateModel, p0_pair: Tuple, t) -> float:
    '''
    D_K(p1(t), p2(t)) = exp(-int_0^t (gamma1 + gamma2)) D_K(p1(0), p2(0)).

    Parameters:
        p0_pair:
            The two initial probability vectors.
        t:
            Time or array of times.
    '''
    initial = kolmogorov_distance(*p0_pair)
    if np.ndim(t):
        return np.array([initial * math.exp(-integrated_rate(m, s)) for s in np.asarray(t, dtype=float)])
    return initial * math.exp(-integrated_rate(m, float(t)))


@dataclass(frozen=True)
class NegativeRateWitness:
    t: float
    row: int
    column: int
    rate: float
    kolmogorov: Optional[KolmogorovWitness] = None


@dataclass
class DemonstrationReport:
    model: dict
    t_end: float
    witness: NegativeRateWitness
    times: np.ndarray
    dk_propagated: np.ndarray
    dk_closed: np.ndarray
    max_deviation: float
    dk_monotone: bool
    min_probability: float
    n_c_general: float
    p_divisible: bool = field(default=False)

    @property
    def verdict(self) -> str:
        return (f"D_K monotone: {'yes' if self.dk_monotone else 'no'}; "
                f"P-divisible: {'yes' if self.p_divisible else 'no'}")

    def to_dict(self) -> dict:
        return {"schema": JSON_SCHEMA_VERSION,
                "model": self.model,
                "t_end": self.t_end,
                "verdict": self.verdict,
                "negative_rate_witness": {"t": self.witness.t,
                                          "row": self.witness.row,
                                          "column": self.witness.column,
                                          "rate": self.witness.rate},
                "dk_monotone": self.dk_monotone,
                "p_divisible": self.p_divisible,
                "max_closed_form_deviation": self.max_deviation,
                "min_probability": self.min_probability,
                "n_c_general": self.n_c_general,
                "trajectory": {"t": self.times.tolist(),
                               "dk_ode": self.dk_propagated.tolist(),
                               "dk_closed_form": self.dk_closed.tolist()}}


def __negative_rate_witness(m: TwoRateModel, grid: np.ndarray) -> NegativeRateWitness:
    best = None
    for t in grid:
        W = w_rates(m.generator(t))
        j, k = np.unravel_index(np.argmin(W + np.diag(np.full(len(W), np.inf))), W.shape)
        if best is None or W[j, k] < best.rate:
            best = NegativeRateWitness(float(t), int(j), int(k), float(W[j, k]))
    _, kolmogorov = kolmogorov_conditions(m.generator(best.t))
    return NegativeRateWitness(best.t, best.row, best.column, best.rate, kolmogorov)


def demonstrate(m: TwoRateModel, T: float) -> DemonstrationReport:
    '''
    Shows on [0, T] that the model breaks P-divisibility while its Kolmogorov
    distance decays monotonically.

    The report carries the most negative W-rate on the condition grid, the D_K
    trajectory of the pair (1,0), (0,1) propagated by the ODE solver next to
    the closed form, and N_C evaluated on the propagated maps.

    Raises:
        ValidationError for an invalid model or one whose gamma2 never turns
        negative.
    '''
    if not T > 0:
        raise ValidationError("t_end must be positive")
    grid = condition_grid(m, T)
    validation = validate_model(m, grid)
    if not validation.ok:
        raise ValidationError("invalid two-rate model: " + "; ".join(validation.violations),
                              validation.violations)
    if not validation.is_counterexample:
        raise ValidationError(NOT_A_COUNTEREXAMPLE)

    witness = __negative_rate_witness(m, grid)
    logger.info("most negative rate W[%d,%d] = %.6g at t = %.6g", witness.row, witness.column, witness.rate,
                witness.t)

    pair = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    times = np.linspace(0.0, T, TRAJECTORY_POINTS)
    first = propagate(m.generator, pair[0], T, t_eval=times)
    second = propagate(m.generator, pair[1], T, t_eval=times)
    dk_ode = np.array([kolmogorov_distance(a, b) for a, b in zip(first.probabilities, second.probabilities)])
    dk_closed = dk_closed_form(m, pair, times)
    deviation = float(np.max(np.abs(dk_ode - dk_closed)))
    if deviation > CLOSED_FORM_AGREEMENT:
        raise NumericalError(f"propagated D_K deviates from the closed form by {deviation:.3g}")

    min_probability = float(min(first.probabilities.min(), second.probabilities.min()))
    family = propagate_maps(m.generator, 2, T, description="two-rate model maps")
    general = n_c_general(family, np.linspace(0.0, T, GENERAL_GRID_POINTS))

    return DemonstrationReport(model=m.describe(),
                               t_end=T,
                               witness=witness,
                               times=times,
                               dk_propagated=dk_ode,
                               dk_closed=dk_closed,
                               max_deviation=deviation,
                               dk_monotone=bool(np.all(np.diff(dk_closed) <= MONOTONE_SLACK)),
                               min_probability=min_probability,
                               n_c_general=general.n_c,
                               p_divisible=witness.rate >= -STOCHASTIC_TOL)
