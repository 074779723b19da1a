import math

import numpy as np
import pytest

from NonMarkov.errors import ValidationError
from NonMarkov.laplace import (ExpPolynomial, ExpTerm, Polynomial, RationalFunction, deriv_exp_poly, eval_exp_poly,
                               contour_degree, inverse_laplace, talbot_inverse)

ERLANG2_Q_HAT = RationalFunction(Polynomial([2.0, 1.0]), Polynomial([2.0, 2.0, 1.0]))


def erlang2_q(t):
    return np.exp(-t) * (np.cos(t) + np.sin(t))


def test_inverse_of_simple_pole():
    f = inverse_laplace(RationalFunction(Polynomial([1.0]), Polynomial([2.0, 1.0])))
    assert f(0.0) == pytest.approx(1.0)
    assert f(1.0) == pytest.approx(math.exp(-2.0), rel=1e-12)


def test_inverse_of_double_pole_at_zero():
    f = inverse_laplace(RationalFunction(Polynomial([1.0]), Polynomial([0.0, 0.0, 1.0])))
    assert f(2.5) == pytest.approx(2.5, rel=1e-12)


def test_inverse_of_complex_pair():
    f = inverse_laplace(ERLANG2_Q_HAT)
    times = np.linspace(0.0, 15.0, 301)
    np.testing.assert_allclose(f(times), erlang2_q(times), atol=1e-13)
    assert f(math.pi) == pytest.approx(-math.exp(-math.pi), rel=1e-10)


def test_conjugate_closure():
    f = inverse_laplace(ERLANG2_Q_HAT)
    complex_terms = [term for term in f.terms if term.pole.imag != 0]
    for term in complex_terms:
        partner = [other for other in complex_terms
                   if other.pole == term.pole.conjugate() and other.power == term.power]
        assert len(partner) == 1
        assert partner[0].coeff == term.coeff.conjugate()


def test_inverse_of_repeated_real_pole():
    # 1/(u+1)^3 -> t^2 e^-t / 2
    f = inverse_laplace(RationalFunction(Polynomial([1.0]), Polynomial([1.0, 1.0]).power(3)))
    times = np.linspace(0.0, 10.0, 101)
    np.testing.assert_allclose(f(times), times ** 2 * np.exp(-times) / 2.0, atol=1e-14)


def test_improper_rejected():
    with pytest.raises(ValidationError, match="improper rational function"):
        inverse_laplace(RationalFunction(Polynomial([1.0, 1.0]), Polynomial([2.0, 1.0])))


def test_zero_transform():
    f = inverse_laplace(RationalFunction(Polynomial([0.0]), Polynomial([1.0, 1.0])))
    assert f(3.0) == 0.0


def test_eval_rejects_negative_time():
    f = inverse_laplace(ERLANG2_Q_HAT)
    with pytest.raises(ValidationError, match="negative time"):
        eval_exp_poly(f, -0.1)


def test_eval_scalar_and_array():
    f = ExpPolynomial((ExpTerm(1.0 + 0j, 0, -2.0 + 0j),))
    assert isinstance(eval_exp_poly(f, 0.0), float)
    assert eval_exp_poly(f, 0.0) == 1.0
    assert eval_exp_poly(f, np.array([0.0, 1.0])).shape == (2,)


def test_derivative_examples():
    decay = ExpPolynomial((ExpTerm(1.0 + 0j, 0, -2.0 + 0j),))
    assert deriv_exp_poly(decay)(0.5) == pytest.approx(-2.0 * math.exp(-1.0))

    constant = ExpPolynomial((ExpTerm(1.0 + 0j, 0, 0j),))
    assert deriv_exp_poly(constant).terms == ()
    assert deriv_exp_poly(constant)(4.0) == 0.0

    dq = deriv_exp_poly(inverse_laplace(ERLANG2_Q_HAT))
    times = np.linspace(0.0, 10.0, 51)
    np.testing.assert_allclose(dq(times), -2.0 * np.exp(-times) * np.sin(times), atol=1e-13)


def test_derivative_against_finite_differences():
    f = inverse_laplace(RationalFunction(Polynomial([3.0, 1.0]),
                                         Polynomial([1.0, 1.0]).power(2) * Polynomial([5.0, 2.0, 1.0])))
    df = f.derivative()
    h = 1e-6
    for t in np.random.default_rng(11).uniform(0.01, 10.0, 50):
        central = (f(t + h) - f(t - h)) / (2.0 * h)
        assert df(t) == pytest.approx(central, rel=1e-5, abs=1e-9)


def test_scaled_time():
    f = inverse_laplace(ERLANG2_Q_HAT)
    g = f.scaled_time(3.0)
    for t in (0.0, 0.4, 1.7):
        assert g(t) == pytest.approx(f(3.0 * t), abs=1e-14)


def test_pole_summary():
    f = inverse_laplace(ERLANG2_Q_HAT)
    assert f.slowest_decay == pytest.approx(1.0)
    assert f.max_frequency == pytest.approx(1.0)


@pytest.mark.parametrize("t, expected", [(1.0, math.exp(-2.0)), (0.5, math.exp(-1.0))])
def test_talbot_simple_pole(t, expected):
    r = RationalFunction(Polynomial([1.0]), Polynomial([2.0, 1.0]))
    assert talbot_inverse(r, t) == pytest.approx(expected, abs=1e-10)


def test_talbot_double_pole_at_zero():
    r = RationalFunction(Polynomial([1.0]), Polynomial([0.0, 0.0, 1.0]))
    assert talbot_inverse(r, 3.0) == pytest.approx(3.0, abs=1e-10)


def test_talbot_rejects_nonpositive_time():
    with pytest.raises(ValidationError, match="Talbot requires t > 0"):
        talbot_inverse(ERLANG2_Q_HAT, 0.0)


def test_exact_inverse_matches_talbot():
    f = inverse_laplace(ERLANG2_Q_HAT)
    for t in np.linspace(0.1, 20.0, 200):
        assert f(t) == pytest.approx(talbot_inverse(ERLANG2_Q_HAT, t), abs=1e-8)


def test_contour_degree_grows_with_time():
    r = RationalFunction(Polynomial([1.0]), Polynomial([26.0, 2.0, 1.0]))  # poles -1 +- 5i
    assert contour_degree(r, 0.5) == 64
    assert contour_degree(r, 40.0) >= math.ceil(2.5 * 5.0 / (0.4 * math.pi) * 40.0)
    # exp(-t) sin(5t) / 5
    for t in (30.0, 45.0):
        assert talbot_inverse(r, t) == pytest.approx(math.exp(-t) * math.sin(5.0 * t) / 5.0, abs=1e-14)
