"""
    Two-site semi-Markov process with a site independent waiting time f(t).

    Everything follows from q(t), the probability of an even number of jumps
    up to t minus the probability of an odd number:

        q^(u) = (1/u) (1 - f^(u)) / (1 + f^(u))
        Lambda(t, 0) = 1/2 [[1 + q, 1 - q], [1 - q, 1 + q]]
        gamma(t) = -q'(t) / (2 q(t))
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from scipy import optimize, special

from NonMarkov.errors import NumericalError, ValidationError
from NonMarkov.laplace.exp_polynomial import ExpPolynomial, inverse_laplace
from NonMarkov.laplace.polynomial import Polynomial
from NonMarkov.laplace.rational import RationalFunction, reduce_rational
from NonMarkov.maps.stochastic_maps import MapFamily
from NonMarkov.settings import (BRENTQ_XTOL, GAMMA_POLE_TOL, MIN_SCAN_POINTS, NOISE_FLOOR, Q0_TOL, Q_BOUND_TOL,
                                RATIONAL_GCD_TOL, SAMPLES_PER_PERIOD)
from NonMarkov.waiting_time.waiting_time import WaitingTimeSpec, laplace, max_rate, scaled

__all__ = ["QFunction", "CriticalStructure", "GammaPole", "q_hat", "q_time_domain", "map_at", "maps_on_grid",
           "gamma_rate", "gamma_on_grid", "critical_structure", "tail_bound", "twosite_generator",
           "twosite_family"]

logger = logging.getLogger(__name__)

CHECK_POINTS = 200
CHECK_ARGUMENTS = np.array([0.5, 2.0, 1.0 + 1.0j])
Q_HAT_CHECK_TOL = 1e-8


@dataclass(frozen=True)
class QFunction:
    q: ExpPolynomial
    dq: ExpPolynomial
    spec: WaitingTimeSpec

    def __call__(self, t):
        return self.q(t)

    @property
    def time_constant(self) -> float:
        """1 / slowest decay rate of q."""
        return 1.0 / self.q.slowest_decay


@dataclass(frozen=True)
class GammaPole:
    """gamma(t) at a zero of q, with its one-sided limits."""
    t: float
    left: float
    right: float


@dataclass(frozen=True)
class CriticalStructure:
    zeros: Tuple[float, ...]
    extrema: Tuple[float, ...]
    horizon: float
    increase_intervals: Tuple[Tuple[float, float], ...]
    tail_bound: float = 0.0
    grid_step: float = 0.0


def q_hat(spec: WaitingTimeSpec) -> RationalFunction:
    '''
    Laplace transform of q(t) in reduced form.

    With f^ = N/D the transform is (D - N) / (u (D + N)). D - N vanishes at
    u = 0 for a normalized f, so its constant coefficient is dropped and the
    factor u cancels.
    '''
    f = laplace(spec)
    difference = f.den - f.num
    total = f.den + f.num

    residual = abs(difference.coeffs[0])
    scale = max(abs(f.den.coeffs[0]), abs(f.num.coeffs[0]), 1.0)
    if residual > RATIONAL_GCD_TOL * scale:
        raise NumericalError("transform reduction failed")
    if difference.degree < 1:
        raise NumericalError("transform reduction failed")

    result = reduce_rational(Polynomial(difference.coeffs[1:]), total)
    # initial value theorem: u q^(u) -> 1
    if result.num.degree != result.den.degree - 1 or abs(result.num.leading - 1.0) > Q0_TOL:
        raise NumericalError("transform reduction failed")

    for u in max_rate(spec) * CHECK_ARGUMENTS:
        fu = f(u)
        direct = (1.0 - fu) / (u * (1.0 + fu))
        if abs(result(u) - direct) > Q_HAT_CHECK_TOL * abs(direct):
            raise NumericalError(f"transform reduction failed: q^({u:.3g}) off by "
                                 f"{abs(result(u) - direct) / abs(direct):.3g}")
    return result


def q_time_domain(spec: WaitingTimeSpec) -> QFunction:
    '''
    Exact q(t) as an exponential polynomial.

    The transform of the spec rescaled to unit fastest rate is inverted and
    the result mapped back to the original time scale, q(t) = q_1(c t), so
    that q only depends on the rates through c t.

    Raises:
        NumericalError if q(0) != 1, a pole does not decay or |q| > 1 on the
        check grid.
    '''
    c = max_rate(spec)
    unit = inverse_laplace(q_hat(scaled(spec, 1.0 / c)))
    q = unit.scaled_time(c)
    qf = QFunction(q, q.derivative(), spec)
    __check_q(qf)
    return qf


def __check_q(qf: QFunction):
    if not qf.q.terms or np.any(qf.q.poles.real >= 0):
        raise NumericalError("q(t) does not decay: pole with nonnegative real part")
    q0 = qf.q(0.0)
    if abs(q0 - 1.0) > Q0_TOL:
        raise NumericalError(f"q(0) = {q0:.12g}, expected 1")
    times = np.linspace(0.0, 20.0 * qf.time_constant, CHECK_POINTS)
    largest = float(np.max(np.abs(qf.q(times))))
    if largest > 1.0 + Q_BOUND_TOL:
        raise NumericalError(f"|q(t)| reaches {largest:.12g} > 1")


def map_at(qf: QFunction, t: float) -> np.ndarray:
    if t < 0:
        raise ValidationError("negative time")
    q = qf.q(t)
    return 0.5 * np.array([[1.0 + q, 1.0 - q], [1.0 - q, 1.0 + q]])


def maps_on_grid(qf: QFunction, times) -> np.ndarray:
    """Stack of Lambda(t, 0) for every t, shape (len(times), 2, 2)."""
    q = qf.q(np.asarray(times, dtype=float))
    maps = np.empty((len(q), 2, 2))
    maps[:, 0, 0] = maps[:, 1, 1] = 0.5 * (1.0 + q)
    maps[:, 0, 1] = maps[:, 1, 0] = 0.5 * (1.0 - q)
    return maps


def gamma_rate(qf: QFunction, t: float) -> Union[float, GammaPole]:
    '''
    Rate gamma(t) = -q'(t) / (2 q(t)) of the time-local generator.

    Returns:
        A float, or a GammaPole with the one-sided limits when |q(t)| is
        below GAMMA_POLE_TOL.
    '''
    if t < 0:
        raise ValidationError("negative time")
    q = qf.q(t)
    if abs(q) > GAMMA_POLE_TOL:
        return -qf.dq(t) / (2.0 * q)

    delta = 1e-8 * max(1.0, t)
    sides = []
    for side in (t - delta, t + delta):
        if side < 0:
            sides.append(math.nan)
            continue
        value = -qf.dq(side) / (2.0 * qf.q(side))
        sides.append(math.copysign(math.inf, value))
    return GammaPole(t, sides[0], sides[1])


def gamma_on_grid(qf: QFunction, times) -> np.ndarray:
    """gamma on a grid, NaN at the poles."""
    times = np.asarray(times, dtype=float)
    q = qf.q(times)
    dq = qf.dq(times)
    gamma = np.full(times.shape, np.nan)
    regular = np.abs(q) > GAMMA_POLE_TOL
    gamma[regular] = -dq[regular] / (2.0 * q[regular])
    return gamma


def tail_bound(qf: QFunction, T: float) -> float:
    '''
    Upper bound of int_T^inf |q'(t)| dt, from the pole envelope of q':
    sum_i |c_i| Gamma(m_i + 1, a_i T) / a_i^(m_i + 1) with a_i = -Re(p_i).

    It bounds |q(t)| for every t >= T as well as the total increase of |q|
    after T.
    '''
    total = 0.0
    for term in qf.dq.terms:
        a = -term.pole.real
        m = term.power
        total += abs(term.coeff) * special.gammaincc(m + 1, a * T) * special.gamma(m + 1) / a ** (m + 1)
    return float(total)


def __find_horizon(qf: QFunction, tail_tol: float) -> Tuple[float, float]:
    bound = lambda T: tail_bound(qf, T) - tail_tol
    upper = qf.time_constant
    while bound(upper) >= 0:
        upper *= 2.0
    horizon = optimize.brentq(bound, 0.0, upper, xtol=BRENTQ_XTOL)
    while bound(horizon) >= 0:
        horizon = np.nextafter(horizon, math.inf) + BRENTQ_XTOL
    return float(horizon), tail_bound(qf, horizon)


def __sign_roots(f, times: np.ndarray, values: np.ndarray) -> List[float]:
    signs = np.sign(values)
    found = [float(t) for t, s in zip(times[1:-1], signs[1:-1]) if s == 0]
    brackets = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    for i in brackets:
        found.append(optimize.brentq(f, times[i], times[i + 1], xtol=BRENTQ_XTOL))
    return sorted(found)


def critical_structure(qf: QFunction, tail_tol: float) -> CriticalStructure:
    '''
    Zeros and extrema of q on [0, T] and the intervals where |q| increases.

    T is the first time after which the tail bound drops below tail_tol. The
    scan grid resolves the fastest oscillation of q with SAMPLES_PER_PERIOD
    points per period (and at least MIN_SCAN_POINTS points in total); sign
    changes of q and q' are then refined by brentq.

    Parameters:
        qf:
            q(t) of the process.
        tail_tol:
            Tolerance in (0, 1) on sup_{t>T} |q(t)| and on the increase of |q|
            after T. tail_tol >= 1 gives an empty structure with T = 0.
    Returns:
        CriticalStructure whose increase intervals (a_i, b_i) run from a zero
        or extremum to the next extremum (or T).
    '''
    if not tail_tol > 0:
        raise ValidationError("tail tolerance must be positive")
    if tail_tol >= 1:
        return CriticalStructure((), (), 0.0, ())

    horizon, bound = __find_horizon(qf, tail_tol)
    step = horizon / MIN_SCAN_POINTS
    frequency = qf.q.max_frequency
    if frequency > 0:
        step = min(step, 2.0 * math.pi / (SAMPLES_PER_PERIOD * frequency))
    times = np.linspace(0.0, horizon, int(math.ceil(horizon / step)) + 1)
    step = float(times[1] - times[0])
    logger.debug("horizon %.6g with tail bound %.3g, %d scan points (step %.3g)",
                 horizon, bound, len(times), step)

    q = qf.q(times)
    dq = qf.dq(times)

    extrema = []
    _, magnitude = qf.dq.evaluate_complex(np.array(0.0))
    if abs(dq[0]) <= Q0_TOL * max(1.0, float(magnitude)):
        extrema.append(0.0)
        dq = dq.copy()
        dq[0] = dq[1]
    zeros = __sign_roots(qf.q, times, q)
    extrema += __sign_roots(qf.dq, times, dq)

    points = sorted(set([0.0, horizon] + zeros + extrema))
    intervals = []
    for a, b in zip(points[:-1], points[1:]):
        middle = 0.5 * (a + b)
        if qf.q(middle) * qf.dq(middle) <= 0:
            continue
        if intervals and intervals[-1][1] == a:
            intervals[-1] = (intervals[-1][0], b)
        else:
            intervals.append((a, b))

    kept = tuple((a, b) for a, b in intervals if abs(qf.q(b)) - abs(qf.q(a)) >= NOISE_FLOOR)
    if len(kept) < len(intervals):
        logger.debug("dropped %d increase intervals below the noise floor", len(intervals) - len(kept))

    return CriticalStructure(tuple(zeros), tuple(extrema), horizon, kept, bound, step)


def twosite_generator(qf: QFunction):
    '''
    Time-local generator L(t) = [[-gamma, gamma], [gamma, -gamma]] as a
    callable, for propagate.
    '''

    def generator(t: float) -> np.ndarray:
        gamma = gamma_rate(qf, t)
        if isinstance(gamma, GammaPole):
            raise NumericalError(f"generator singular at t={t:.12g}")
        return np.array([[-gamma, gamma], [gamma, -gamma]])

    return generator


def twosite_family(qf: QFunction, t_max: float) -> MapFamily:
    return MapFamily(evaluator=lambda t: map_at(qf, t),
                     t_max=t_max,
                     dimension=2,
                     time_scale=qf.time_constant,
                     batch=lambda times: maps_on_grid(qf, times),
                     description="two-site semi-Markov maps")
