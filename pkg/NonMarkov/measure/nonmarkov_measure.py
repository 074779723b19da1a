"""
    The measure N_C of memory effects: the total increase of the Kolmogorov
    distance between two evolving distributions, maximized over initial pairs.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate

from NonMarkov.errors import ValidationError
from NonMarkov.maps.stochastic_maps import MapFamily, kolmogorov_distance
from NonMarkov.semimarkov.two_site import CriticalStructure, QFunction, critical_structure, q_time_domain
from NonMarkov.settings import DEFAULT_TAIL_TOL, JSON_SCHEMA_VERSION, NOISE_FLOOR
from NonMarkov.waiting_time.waiting_time import WaitingTimeSpec

__all__ = ["NonMarkovReport", "n_c_twosite", "n_c_quadrature", "n_c_general", "sigma"]

logger = logging.getLogger(__name__)


@dataclass
class NonMarkovReport:
    n_c: float
    increase_intervals: List[Tuple[float, float]]
    contributions: List[float]
    horizon: float
    tail_bound: float
    maximizing_pair: Tuple[np.ndarray, np.ndarray]
    zeros: List[float] = field(default_factory=list)
    extrema: List[float] = field(default_factory=list)
    lower_bound: bool = False
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"schema": JSON_SCHEMA_VERSION,
                "n_c": self.n_c,
                "lower_bound": self.lower_bound,
                "increase_intervals": [list(interval) for interval in self.increase_intervals],
                "contributions": list(self.contributions),
                "zeros": list(self.zeros),
                "extrema": list(self.extrema),
                "horizon": self.horizon,
                "tail_bound": self.tail_bound,
                "maximizing_pair": [np.asarray(p).tolist() for p in self.maximizing_pair],
                "diagnostics": self.diagnostics}


def n_c_twosite(spec: WaitingTimeSpec, tail_tol: float = DEFAULT_TAIL_TOL,
                qf: Optional[QFunction] = None) -> NonMarkovReport:
    '''
    N_C of the two-site semi-Markov process with waiting time spec, as the sum
    of |q(b_i)| - |q(a_i)| over the intervals where |q| increases.

    The maximizing pair is (1,0), (0,1), for which D_K(t) = |q(t)|. The
    increase left after the horizon is bounded by tail_bound.
    '''
    if qf is None:
        qf = q_time_domain(spec)
    structure = critical_structure(qf, tail_tol)
    contributions = [float(abs(qf.q(b)) - abs(qf.q(a))) for a, b in structure.increase_intervals]
    report = NonMarkovReport(n_c=math.fsum(contributions),
                             increase_intervals=list(structure.increase_intervals),
                             contributions=contributions,
                             horizon=structure.horizon,
                             tail_bound=structure.tail_bound,
                             maximizing_pair=(np.array([1.0, 0.0]), np.array([0.0, 1.0])),
                             zeros=list(structure.zeros),
                             extrema=list(structure.extrema),
                             diagnostics={"scan_step": structure.grid_step,
                                          "tail_tol": tail_tol,
                                          "slowest_decay": qf.q.slowest_decay,
                                          "max_frequency": qf.q.max_frequency})
    logger.debug("N_C = %.12g from %d intervals, horizon %.6g", report.n_c, len(contributions), report.horizon)
    return report


def n_c_quadrature(qf: QFunction, structure: CriticalStructure) -> float:
    '''
    N_C as the integral of the positive part of d|q|/dt over [0, T], by
    adaptive quadrature between consecutive zeros and extrema (where the sign
    of d|q|/dt is constant).
    '''
    points = sorted(set([0.0, structure.horizon] + list(structure.zeros) + list(structure.extrema)))
    total = []
    for a, b in zip(points[:-1], points[1:]):
        if b <= a:
            continue
        middle = 0.5 * (a + b)
        sign = math.copysign(1.0, qf.q(middle))
        value, _ = integrate.quad(lambda t: sign * qf.dq(t), a, b, epsabs=1e-14, epsrel=1e-12, limit=200)
        if value > NOISE_FLOOR:
            total.append(value)
    return math.fsum(total)


def __dk_trajectory(maps: np.ndarray, i: int, j: int) -> np.ndarray:
    # columns i and j are the images of the basis vectors e_i, e_j
    return 0.5 * np.abs(maps[:, :, i] - maps[:, :, j]).sum(axis=1)


def n_c_general(fam: MapFamily, grid) -> NonMarkovReport:
    '''
    N_C of an arbitrary map family, restricted to pairs of basis vectors.

    For every pair of distinct vertices of the simplex the D_K trajectory is
    sampled on the grid and its positive increments are summed. The maximum
    over pairs is a lower bound of N_C for N > 2 and exact for N = 2.
    '''
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be strictly increasing with at least two points")
    n = fam.dimension
    if n < 2:
        raise ValidationError("N_C needs at least two sites")
    maps = fam.on_grid(grid)

    best = None
    for i, j in itertools.combinations(range(n), 2):
        dk = __dk_trajectory(maps, i, j)
        increments = np.diff(dk)
        rising = increments > NOISE_FLOOR
        total = math.fsum(increments[rising])
        if best is None or total > best[0]:
            best = (total, i, j, rising, increments)

    total, i, j, rising, increments = best
    intervals, contributions = [], []
    for k in np.nonzero(rising)[0]:
        if intervals and intervals[-1][1] == grid[k]:
            intervals[-1] = (intervals[-1][0], float(grid[k + 1]))
            contributions[-1] += float(increments[k])
        else:
            intervals.append((float(grid[k]), float(grid[k + 1])))
            contributions.append(float(increments[k]))

    basis = np.eye(n)
    return NonMarkovReport(n_c=total,
                           increase_intervals=intervals,
                           contributions=contributions,
                           horizon=float(grid[-1]),
                           tail_bound=math.nan,
                           maximizing_pair=(basis[i], basis[j]),
                           lower_bound=n > 2,
                           diagnostics={"pairs": n * (n - 1) // 2,
                                        "grid_resolution": float(np.max(np.diff(grid))),
                                        "description": fam.description})


def sigma(fam: MapFamily, pair, t: float, h: float) -> float:
    '''
    Rate of change sigma(t) = d/dt D_K(Lambda(t) p1, Lambda(t) p2) by central
    differences (forward differences closer than h to t = 0).
    '''
    if not h > 0:
        raise ValidationError("differentiation step must be positive")
    p1, p2 = (np.asarray(p, dtype=float) for p in pair)
    dk = lambda s: kolmogorov_distance(fam(s) @ p1, fam(s) @ p2)
    if t >= h:
        return (dk(t + h) - dk(t - h)) / (2.0 * h)
    return (dk(t + h) - dk(t)) / h
