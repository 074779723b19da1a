import math

import numpy as np
import pytest

from NonMarkov.errors import ValidationError
from NonMarkov.waiting_time import (Branch, Convolution, Erlang, Exponential, Mixture, check_valid, laplace, max_rate,
                                    mean, mixture_spec, sample, sample_many, scaled, spec_from_dict, spec_to_dict,
                                    tree_moments, validate, variance)

MIXTURE = Mixture((Branch(0.1, Exponential(1.0)), Branch(0.9, Exponential(5.0))))

BATTERY = [Exponential(2.0),
           Erlang(3, 1.0),
           MIXTURE,
           Convolution((MIXTURE, MIXTURE)),
           Convolution((Exponential(1.0), Erlang(2, 3.0), Exponential(0.5)))]


@pytest.fixture
def points():
    return np.random.default_rng(5).uniform(0.0, 10.0, 10)


def test_exponential_transform(points):
    np.testing.assert_allclose(laplace(Exponential(1.0))(points), 1.0 / (points + 1.0), rtol=1e-12)


def test_erlang_transform(points):
    np.testing.assert_allclose(laplace(Erlang(2, 1.0))(points), 1.0 / (points + 1.0) ** 2, rtol=1e-12)


def test_mixture_transform(points):
    spec = Mixture((Branch(0.5, Exponential(1.0)), Branch(0.5, Exponential(5.0))))
    np.testing.assert_allclose(laplace(spec)(points), 0.5 / (points + 1.0) + 2.5 / (points + 5.0), rtol=1e-12)


def test_erlang_equals_convolution_of_exponentials(points):
    erlang = laplace(Erlang(3, 2.0))
    convolution = laplace(Convolution((Exponential(2.0),) * 3))
    np.testing.assert_allclose(erlang(points), convolution(points), rtol=1e-12)


@pytest.mark.parametrize("spec", BATTERY)
def test_transform_is_normalized(spec):
    assert laplace(spec)(0.0) == pytest.approx(1.0, abs=1e-10)


def test_validate_accepts_valid_spec():
    assert validate(Exponential(1.0)) == []
    assert validate(Mixture((Branch(1.0, Exponential(3.0)),))) == []


@pytest.mark.parametrize("spec, message", [
    (Exponential(-1.0), "rate must be positive"),
    (Erlang(0, 1.0), "erlang order must be a positive integer"),
    (Convolution((Exponential(1.0),)), "convolution needs at least 2 children"),
    (Mixture(()), "mixture needs at least 1 branch"),
    (Mixture((Branch(0.3, Exponential(1.0)), Branch(0.3, Exponential(2.0)))), "weights sum to 0.6"),
    (Mixture((Branch(-0.5, Exponential(1.0)), Branch(1.5, Exponential(2.0)))), "weights must be nonnegative"),
])
def test_validate_reports_violations(spec, message):
    assert message in validate(spec)


def test_check_valid_raises_with_violations():
    spec = Convolution((Exponential(-1.0), Erlang(2, 0.0)))
    with pytest.raises(ValidationError) as info:
        check_valid(spec)
    assert info.value.violations == ["rate must be positive", "rate must be positive"]


def test_laplace_of_invalid_spec():
    with pytest.raises(ValidationError):
        laplace(Exponential(0.0))


def test_mean_examples():
    assert mean(Exponential(2.0)) == pytest.approx(0.5)
    assert mean(Erlang(3, 1.0)) == pytest.approx(3.0)
    assert mean(MIXTURE) == pytest.approx(0.28)


@pytest.mark.parametrize("spec", BATTERY)
def test_moments_agree_with_tree(spec):
    tree_mean, tree_variance = tree_moments(spec)
    assert mean(spec) == pytest.approx(tree_mean, abs=1e-10)
    assert variance(spec) == pytest.approx(tree_variance, rel=1e-9)


def test_sample_is_reproducible():
    first = [sample(Exponential(1.0), np.random.default_rng(42)) for _ in range(3)]
    second = [sample(Exponential(1.0), np.random.default_rng(42)) for _ in range(3)]
    assert first == second
    np.testing.assert_array_equal(sample_many(MIXTURE, np.random.default_rng(9), 100),
                                  sample_many(MIXTURE, np.random.default_rng(9), 100))


@pytest.mark.parametrize("spec", BATTERY + [Mixture((Branch(1.0, Exponential(3.0)),))])
def test_sample_mean_within_four_standard_errors(spec):
    draws = sample_many(spec, np.random.default_rng(2024), 100_000)
    assert abs(draws.mean() - mean(spec)) <= 4.0 * math.sqrt(variance(spec) / len(draws))
    assert np.all(draws > 0)


def test_scalar_sampler_matches_moments():
    rng = np.random.default_rng(7)
    draws = np.array([sample(Erlang(2, 1.0), rng) for _ in range(20_000)])
    assert abs(draws.mean() - 2.0) <= 4.0 * math.sqrt(2.0 / len(draws))


@pytest.mark.slow
@pytest.mark.parametrize("spec", BATTERY)
def test_sample_moments_large(spec):
    draws = sample_many(spec, np.random.default_rng(1), 1_000_000)
    m, v = mean(spec), variance(spec)
    assert abs(draws.mean() - m) <= 4.0 * math.sqrt(v / len(draws))
    # standard error of the sample variance from the fourth central moment
    fourth = np.mean((draws - m) ** 4)
    assert abs(draws.var() - v) <= 4.0 * math.sqrt((fourth - v ** 2) / len(draws))


def test_scaled_and_max_rate():
    assert scaled(Erlang(2, 1.0), 3.0) == Erlang(2, 3.0)
    assert scaled(MIXTURE, 2.0) == Mixture((Branch(0.1, Exponential(2.0)), Branch(0.9, Exponential(10.0))))
    assert max_rate(mixture_spec(0.1, 1.0, 5.0)) == 5.0


def test_mixture_spec():
    spec = mixture_spec(0.1, 1.0, 5.0)
    assert spec == Convolution((MIXTURE, MIXTURE))
    with pytest.raises(ValidationError):
        mixture_spec(1.5, 1.0, 5.0)


def test_spec_document():
    spec = Convolution((MIXTURE, Erlang(2, 3.0)))
    assert spec_from_dict(spec_to_dict(spec)) == spec
    assert spec_to_dict(Exponential(1.0)) == {"type": "exp", "rate": 1.0}


@pytest.mark.parametrize("document", [
    {"type": "gamma", "rate": 1.0},
    {"type": "exp"},
    {"rate": 1.0},
    {"type": "mix", "branches": [{"weight": 1.0}]},
    {"type": "erlang", "n": "two", "rate": 1.0},
])
def test_malformed_spec_document(document):
    with pytest.raises(ValidationError):
        spec_from_dict(document)
