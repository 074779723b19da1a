"""
    Real-coefficient polynomials in the Laplace variable u and their complex roots.

    Coefficients are stored lowest degree first, the convention of
    numpy.polynomial.polynomial, which does the arithmetic.
"""

import logging
from dataclasses import dataclass
from typing import List, Union

import mpmath
import numpy as np
from numpy.polynomial import polynomial as P
from scipy.cluster.hierarchy import linkage, to_tree

from NonMarkov.errors import ValidationError
from NonMarkov.settings import (MP_DPS, MULTIPLE_ROOT_TOL, NEWTON_MAX_STEPS, REAL_POLE_TOL, ROOT_CLUSTER_FACTOR,
                                ROOT_RESIDUAL_TOL)

__all__ = ["Polynomial", "Root", "poly_arith", "roots"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Polynomial:
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        assert coeffs.ndim == 1 and len(coeffs) > 0, "a polynomial needs at least one coefficient"
        coeffs = P.polytrim(coeffs, tol=0)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def constant(cls, value: float) -> "Polynomial":
        return cls(np.array([value], dtype=float))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return float(self.coeffs[-1])

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0.0

    def __call__(self, u):
        return P.polyval(u, self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(P.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(P.polysub(self.coeffs, other.coeffs))

    def __mul__(self, other: Union["Polynomial", float]) -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(P.polymul(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * float(other))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs.tolist()})"

    def monic(self) -> "Polynomial":
        return Polynomial(self.coeffs / self.leading)

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial.constant(0.0)
        return Polynomial(P.polyder(self.coeffs))

    def power(self, n: int) -> "Polynomial":
        return Polynomial(P.polypow(self.coeffs, n))

    def scale(self) -> float:
        """Size of the coefficients, used to make residual tests relative."""
        return float(np.max(np.abs(self.coeffs)))

    def magnitude_at(self, u) -> float:
        """sum_k |c_k| |u|^k, the natural scale of |p(u)| under rounding."""
        return float(P.polyval(abs(u), np.abs(self.coeffs)))

    def mp_coeffs(self) -> list:
        """Coefficients highest degree first, as mpmath.polyval expects them."""
        return [mpmath.mpf(float(c)) for c in self.coeffs[::-1]]


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int = 1


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValidationError(f"unknown polynomial operation '{op}'")


def roots(p: Polynomial) -> List[Root]:
    '''
    Complex roots of p with their multiplicities.

    The companion-matrix eigenvalues of the monic polynomial give the first
    estimate. Rounding splits an m-fold root into m estimates spread by about
    eps^(1/m), so a group of m estimates within ROOT_CLUSTER_FACTOR *
    eps^(1/m) of its centre becomes one m-fold root, provided the Newton
    zero of the (m-1)-th derivative near the centre also zeroes p (relative
    residual below MULTIPLE_ROOT_TOL). Every root is then polished by Newton
    steps in extended precision (on the (m-1)-th derivative for a root of
    multiplicity m, where it is simple). Complex roots are returned in exact
    conjugate pairs.

    Returns:
        A list of Root, ordered by real part then imaginary part.
    '''
    if p.degree < 1:
        raise ValidationError("constant polynomial")

    monic = p.monic()
    estimates = P.polyroots(monic.coeffs).astype(complex)

    found = []
    for members in __cluster(monic, estimates):
        guess = complex(np.mean(members))
        multiplicity = len(members)
        spread = float(np.max(np.abs(members - guess))) if multiplicity > 1 else 0.0
        found.append(Root(__polish(monic, guess, multiplicity, spread), multiplicity))

    found = __conjugate_closure(found)
    assert sum(r.multiplicity for r in found) == p.degree

    residual = max(abs(monic(r.value)) / max(1.0, abs(r.value)) ** p.degree for r in found)
    if residual > ROOT_RESIDUAL_TOL:
        logger.warning("root residual %.3g above %.1g for degree %d polynomial",
                       residual, ROOT_RESIDUAL_TOL, p.degree)
    return sorted(found, key=lambda r: (r.value.real, r.value.imag))


def __cluster(monic: Polynomial, estimates: np.ndarray) -> List[np.ndarray]:
    if len(estimates) == 1:
        return [estimates]
    points = np.column_stack([estimates.real, estimates.imag])
    return __split(monic, estimates, to_tree(linkage(points, method="single")))


def __split(monic: Polynomial, estimates: np.ndarray, node) -> List[np.ndarray]:
    members = estimates[node.pre_order()]
    if node.is_leaf() or __is_multiple(monic, members):
        return [members]
    return __split(monic, estimates, node.get_left()) + __split(monic, estimates, node.get_right())


def __is_multiple(monic: Polynomial, members: np.ndarray) -> bool:
    m = len(members)
    centre = complex(np.mean(members))
    spread = float(np.max(np.abs(members - centre)))
    if spread > ROOT_CLUSTER_FACTOR * np.finfo(float).eps ** (1.0 / m) * max(1.0, abs(centre)):
        return False
    z = __polish(monic, centre, m, spread)
    with mpmath.workdps(MP_DPS):
        value = abs(mpmath.polyval(monic.mp_coeffs(), mpmath.mpc(z.real, z.imag)))
    return float(value) <= MULTIPLE_ROOT_TOL * monic.magnitude_at(z)


def __polish(monic: Polynomial, guess: complex, multiplicity: int, spread: float) -> complex:
    with mpmath.workdps(MP_DPS):
        coeffs = monic.mp_coeffs()
        for _ in range(multiplicity - 1):
            degree = len(coeffs) - 1
            coeffs = [c * (degree - i) for i, c in enumerate(coeffs[:-1])]

        z = mpmath.mpc(guess.real, guess.imag)
        stop = mpmath.mpf(10) ** (-(MP_DPS - 5))
        for _ in range(NEWTON_MAX_STEPS):
            value, slope = mpmath.polyval(coeffs, z, derivative=True)
            if slope == 0:
                break
            step = value / slope
            z -= step
            if abs(step) <= stop * max(1, abs(z)):
                break
        polished = complex(z)

    # newton may wander off to a neighbouring root
    if abs(polished - guess) > max(10 * spread, 1e-6 * max(1.0, abs(guess))):
        return guess
    return polished


def __conjugate_closure(found: List[Root]) -> List[Root]:
    real, upper = [], []
    for r in found:
        if abs(r.value.imag) <= REAL_POLE_TOL * max(1.0, abs(r.value)):
            real.append(Root(complex(r.value.real, 0.0), r.multiplicity))
        elif r.value.imag > 0:
            upper.append(r)
    return real + upper + [Root(r.value.conjugate(), r.multiplicity) for r in upper]
