import logging
from dataclasses import dataclass
from typing import List

import mpmath
import numpy as np
from numpy.polynomial import polynomial as P

from NonMarkov.errors import ValidationError
from NonMarkov.laplace.polynomial import Polynomial, roots
from NonMarkov.settings import RATIONAL_GCD_TOL

__all__ = ["RationalFunction", "rational_arith", "reduce_rational"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """
    num(u) / den(u) with a monic denominator.

    Use reduce_rational (or rational_arith) to obtain the reduced form;
    the constructor only normalizes the denominator.
    """
    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.den.is_zero:
            raise ValidationError("denominator is identically zero")
        lead = self.den.leading
        if lead != 1.0:
            object.__setattr__(self, "num", self.num * (1.0 / lead))
            object.__setattr__(self, "den", self.den * (1.0 / lead))

    @classmethod
    def constant(cls, value: float) -> "RationalFunction":
        return cls(Polynomial.constant(value), Polynomial.constant(1.0))

    def __call__(self, u):
        return self.num(u) / self.den(u)

    def __repr__(self) -> str:
        return f"RationalFunction(num={self.num.coeffs.tolist()}, den={self.den.coeffs.tolist()})"

    def __add__(self, other):
        return rational_arith(self, other, "add")

    def __sub__(self, other):
        return rational_arith(self, other, "sub")

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return rational_arith(self, other, "mul")
        return RationalFunction(self.num * float(other), self.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return rational_arith(self, other, "div")

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_strictly_proper(self) -> bool:
        return self.num.is_zero or self.num.degree < self.den.degree

    def eval_mp(self, u):
        """Evaluation in the current mpmath precision."""
        return mpmath.polyval(self.num.mp_coeffs(), u) / mpmath.polyval(self.den.mp_coeffs(), u)

    def taylor_at_zero(self, order: int) -> List[float]:
        '''
        Taylor coefficients r(0), r'(0), r''(0)/2, ... up to u^order, by power
        series division of the numerator by the denominator.
        '''
        den = np.zeros(order + 1)
        num = np.zeros(order + 1)
        den[:min(order + 1, len(self.den.coeffs))] = self.den.coeffs[:order + 1]
        num[:min(order + 1, len(self.num.coeffs))] = self.num.coeffs[:order + 1]
        if den[0] == 0.0:
            raise ValidationError("rational function has a pole at u=0")
        series = np.zeros(order + 1)
        for k in range(order + 1):
            series[k] = (num[k] - np.dot(den[1:k + 1], series[k - 1::-1][:k])) / den[0]
        return series.tolist()


def rational_arith(a: RationalFunction, b: RationalFunction, op: str) -> RationalFunction:
    if op == "add":
        num = a.num * b.den + b.num * a.den
        den = a.den * b.den
    elif op == "sub":
        num = a.num * b.den - b.num * a.den
        den = a.den * b.den
    elif op == "mul":
        num = a.num * b.num
        den = a.den * b.den
    elif op == "div":
        if b.is_zero:
            raise ValidationError("zero divisor")
        num = a.num * b.den
        den = a.den * b.num
    else:
        raise ValidationError(f"unknown rational operation '{op}'")
    return reduce_rational(num, den)


def reduce_rational(num: Polynomial, den: Polynomial, tol: float = RATIONAL_GCD_TOL) -> RationalFunction:
    '''
    Cancel the roots shared by numerator and denominator.

    A numerator root r is taken as shared when a denominator root lies within
    tol * max(1, |r|) of it. Each shared root (or conjugate pair) is divided
    out of both polynomials once per pass, until no shared root is left.
    '''
    if den.is_zero:
        raise ValidationError("denominator is identically zero")
    if num.is_zero:
        return RationalFunction(num, Polynomial.constant(1.0))

    while num.degree >= 1 and den.degree >= 1:
        poles = [root.value for root in roots(den)]
        shared = None
        for root in roots(num):
            if root.value.imag < 0:
                continue
            if any(abs(root.value - pole) <= tol * max(1.0, abs(root.value)) for pole in poles):
                shared = root.value
                break
        if shared is None:
            break
        logger.debug("cancelling common factor at u=%s", shared)
        num = __deflate(num, shared)
        den = __deflate(den, shared)

    return RationalFunction(num, den)


def __deflate(p: Polynomial, root: complex) -> Polynomial:
    if root.imag == 0.0:
        factor = np.array([-root.real, 1.0])
    else:
        factor = np.array([abs(root) ** 2, -2.0 * root.real, 1.0])
    quotient, _ = P.polydiv(p.coeffs, factor)
    return Polynomial(quotient)
