"""
    Exponential polynomials sum_i c_i t^m_i exp(p_i t) and the exact inverse
    Laplace transform of strictly proper rational functions onto them.
"""

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import List, Tuple, Union

import mpmath
import numpy as np

from NonMarkov.errors import NumericalError, ValidationError
from NonMarkov.laplace.polynomial import Root, roots
from NonMarkov.laplace.rational import RationalFunction
from NonMarkov.settings import IMAG_RESIDUE_TOL, MP_DPS

__all__ = ["ExpTerm", "ExpPolynomial", "inverse_laplace", "eval_exp_poly", "deriv_exp_poly"]


@dataclass(frozen=True)
class ExpTerm:
    coeff: complex
    power: int
    pole: complex


@dataclass(frozen=True)
class ExpPolynomial:
    terms: Tuple[ExpTerm, ...] = ()

    def __call__(self, t: Union[float, np.ndarray]):
        return eval_exp_poly(self, t)

    @property
    def poles(self) -> np.ndarray:
        return np.array([term.pole for term in self.terms], dtype=complex)

    @property
    def slowest_decay(self) -> float:
        """Smallest |Re p| over all poles (the slowest decay rate)."""
        return float(np.min(np.abs(self.poles.real))) if self.terms else math.inf

    @property
    def max_frequency(self) -> float:
        return float(np.max(np.abs(self.poles.imag))) if self.terms else 0.0

    def evaluate_complex(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        '''
        Returns:
            The complex sum and the sum of the term magnitudes at every t.
        '''
        t = np.asarray(t, dtype=float)
        if not self.terms:
            return np.zeros(t.shape, dtype=complex), np.zeros(t.shape)
        coeffs = np.array([term.coeff for term in self.terms], dtype=complex)
        powers = np.array([term.power for term in self.terms])
        parts = coeffs * t[..., None] ** powers * np.exp(self.poles * t[..., None])
        return parts.sum(axis=-1), np.abs(parts).sum(axis=-1)

    def scaled_time(self, factor: float) -> "ExpPolynomial":
        """g(t) = f(factor * t)."""
        return ExpPolynomial(tuple(ExpTerm(term.coeff * factor ** term.power, term.power, term.pole * factor)
                                   for term in self.terms))

    def derivative(self) -> "ExpPolynomial":
        return deriv_exp_poly(self)


def eval_exp_poly(f: ExpPolynomial, t: Union[float, np.ndarray]):
    '''
    Real value of f at t >= 0 (scalar or array).

    The imaginary part left over by the conjugate pairs must stay below
    IMAG_RESIDUE_TOL relative to the sum of the term magnitudes.
    '''
    times = np.asarray(t, dtype=float)
    if np.any(times < 0):
        raise ValidationError("negative time")
    value, magnitude = f.evaluate_complex(times)
    if np.any(np.abs(value.imag) > IMAG_RESIDUE_TOL * np.maximum(magnitude, np.finfo(float).tiny)):
        raise NumericalError("exponential polynomial is not real: conjugate pairs broken")
    if np.ndim(t) == 0:
        return float(value.real)
    return value.real


def deriv_exp_poly(f: ExpPolynomial) -> ExpPolynomial:
    collected = OrderedDict()

    def add(power, pole, coeff):
        if coeff != 0:
            collected[(power, pole)] = collected.get((power, pole), 0) + coeff

    for term in f.terms:
        add(term.power, term.pole, term.coeff * term.pole)
        if term.power > 0:
            add(term.power - 1, term.pole, term.coeff * term.power)

    return ExpPolynomial(tuple(ExpTerm(complex(c), power, pole)
                               for (power, pole), c in collected.items() if c != 0))


def inverse_laplace(r: RationalFunction) -> ExpPolynomial:
    '''
    Exact inverse Laplace transform of a strictly proper rational function.

    The partial fraction expansion over the poles of r is computed in extended
    precision and each term c / (u - p)^k is mapped to
    c t^(k-1) exp(p t) / (k-1)!. Terms of complex conjugate poles are taken as
    exact conjugates of each other.
    '''
    if not r.is_strictly_proper:
        raise ValidationError("improper rational function")
    if r.is_zero:
        return ExpPolynomial()

    poles = roots(r.den)
    terms = []
    for index, pole in enumerate(poles):
        if pole.value.imag < 0:
            continue
        others = [other for j, other in enumerate(poles) if j != index]
        expansion = __principal_part(r, pole, others)
        for k, coeff in enumerate(expansion):
            power = pole.multiplicity - 1 - k
            coeff = coeff / math.factorial(power)
            if pole.value.imag == 0:
                terms.append(ExpTerm(complex(coeff.real, 0.0), power, pole.value))
            else:
                terms.append(ExpTerm(coeff, power, pole.value))
                terms.append(ExpTerm(coeff.conjugate(), power, pole.value.conjugate()))
    return ExpPolynomial(tuple(terms))


def __principal_part(r: RationalFunction, pole: Root, others: List[Root]) -> List[complex]:
    '''
    Coefficients a_0 .. a_(m-1) of the Taylor series at the pole of
    g(u) = num(u) / prod_j (u - p_j)^m_j, the product running over the other
    poles; a_k multiplies 1 / (u - p)^(m-k) in the partial fraction expansion.
    '''
    m = pole.multiplicity
    with mpmath.workdps(MP_DPS):
        p = mpmath.mpc(pole.value.real, pole.value.imag)
        series = __taylor_shift(r.num.mp_coeffs(), p, m)
        for other in others:
            d = p - mpmath.mpc(other.value.real, other.value.imag)
            inverse = [(-1) ** k / d ** (k + 1) for k in range(m)]
            for _ in range(other.multiplicity):
                series = __series_mul(series, inverse, m)
        scale = mpmath.mpf(float(r.den.leading))
        return [complex(c / scale) for c in series]


def __taylor_shift(coeffs_high_first: list, p, order: int) -> list:
    """Taylor coefficients of a polynomial at p, by repeated synthetic division."""
    remaining = list(coeffs_high_first)
    result = []
    for _ in range(order):
        if not remaining:
            result.append(mpmath.mpc(0))
            continue
        quotient = []
        acc = mpmath.mpc(0)
        for c in remaining:
            acc = acc * p + c
            quotient.append(acc)
        result.append(quotient.pop())
        remaining = quotient
    return result


def __series_mul(a: list, b: list, order: int) -> list:
    return [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(order)]
