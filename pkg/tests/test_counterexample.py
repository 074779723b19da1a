import math

import numpy as np
import pandas as pd
import pytest

from NonMarkov.counterexample import (ConstantRate, SinusoidRate, TabulatedRate, TwoRateModel, default_model,
                                      demonstrate, dk_closed_form, integrated_rate, parse_rate, validate_model)
from NonMarkov.errors import ValidationError
from NonMarkov.settings import RateForm

PAIR = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))


@pytest.fixture(scope="module")
def report():
    return demonstrate(default_model(), 4.0 * math.pi)


def test_parse_rate_forms():
    assert parse_rate("const:1") == ConstantRate(1.0)
    cosine = parse_rate("cos:1,0.5")
    assert cosine == SinusoidRate(1.0, 0.5)
    assert cosine(0.0) == pytest.approx(1.5)
    assert cosine(math.pi) == pytest.approx(-0.5)
    sine = parse_rate("sin:2,3,0.5")
    assert sine.form == RateForm.SINE
    assert sine.period == pytest.approx(4.0 * math.pi)
    assert sine(math.pi) == pytest.approx(5.0)


@pytest.mark.parametrize("text", ["1", "const:x", "gauss:1,2", "cos:1", "cos:1,2,3,4", "const:1,2", "cos:1,0,0"])
def test_parse_rate_errors(text):
    with pytest.raises(ValidationError):
        parse_rate(text)


def test_rates_on_arrays():
    times = np.linspace(0.0, 3.0, 7)
    assert ConstantRate(2.0)(times).shape == (7,)
    np.testing.assert_allclose(SinusoidRate(1.0, 0.5)(times), np.cos(times) + 0.5)
    np.testing.assert_allclose(SinusoidRate(1.0, 0.5).integral(times), np.sin(times) + 0.5 * times)
    np.testing.assert_allclose(SinusoidRate(2.0, 1.0, form=RateForm.SINE).integral(times),
                               times + 2.0 * (1.0 - np.cos(times)))


def test_tabulated_rate(tmp_path):
    path = tmp_path / "gamma2.csv"
    times = np.linspace(0.0, 2.0 * math.pi, 4001)
    pd.DataFrame({"t": times, "rate": np.cos(times) + 0.9}).to_csv(path, index=False)

    rate = parse_rate(f"table:{path}")
    assert isinstance(rate, TabulatedRate)
    assert rate(math.pi) == pytest.approx(-0.1, abs=1e-5)
    assert rate.integral(1.0) is None

    model = TwoRateModel(ConstantRate(1.0), rate)
    validation = validate_model(model, t_end=2.0 * math.pi)
    assert validation.ok
    assert validation.is_counterexample


def test_tabulated_rate_needs_columns(tmp_path):
    path = tmp_path / "bad.csv"
    pd.DataFrame({"time": [0.0, 1.0], "value": [1.0, 1.0]}).to_csv(path, index=False)
    with pytest.raises(ValidationError, match="t,rate"):
        parse_rate(f"table:{path}")


def test_generator_structure():
    model = TwoRateModel(ConstantRate(1.0), ConstantRate(-0.3))
    np.testing.assert_allclose(model.generator(0.0), [[-1.0, -0.3], [1.0, 0.3]])


def test_default_model_is_valid_counterexample():
    validation = validate_model(default_model(), t_end=4.0 * math.pi)
    assert validation.ok
    assert validation.is_counterexample
    assert validation.flags == []


def test_integral_of_gamma2_must_stay_nonnegative():
    model = TwoRateModel(ConstantRate(1.0), parse_rate("cos:1,0"))
    validation = validate_model(model, t_end=2.0 * math.pi)
    assert "∫γ₂ < 0 at t ≈ 4.7" in validation.violations


def test_rate_sum_must_stay_nonnegative():
    model = TwoRateModel(ConstantRate(0.2), parse_rate("cos:1,0.5"))
    validation = validate_model(model, t_end=2.0 * math.pi)
    assert any(v.startswith("γ₁ + γ₂ < 0") for v in validation.violations)

    negative = TwoRateModel(ConstantRate(-1.0), ConstantRate(3.0))
    assert any(v.startswith("γ₁ < 0") for v in validate_model(negative, t_end=1.0).violations)


def test_constant_rates_are_flagged():
    validation = validate_model(TwoRateModel(ConstantRate(1.0), ConstantRate(1.0)), t_end=5.0)
    assert validation.ok
    assert validation.flags == ["not a counterexample: γ₂ never negative"]


def test_dk_closed_form():
    model = default_model()
    times = np.linspace(0.0, 4.0 * math.pi, 41)
    np.testing.assert_allclose(dk_closed_form(model, PAIR, times), np.exp(-(1.9 * times + np.sin(times))), atol=1e-9)
    assert dk_closed_form(model, PAIR, 0.0) == 1.0

    still = TwoRateModel(ConstantRate(0.0), ConstantRate(0.0))
    start = (np.array([0.7, 0.3]), np.array([0.2, 0.8]))
    assert dk_closed_form(still, start, 5.0) == pytest.approx(0.5)
    assert integrated_rate(model, 2.0) == pytest.approx(3.8 + math.sin(2.0), abs=1e-10)


def test_demonstrate_default(report):
    assert report.verdict == "D_K monotone: yes; P-divisible: no"
    assert report.dk_monotone
    assert not report.p_divisible
    assert report.max_deviation <= 1e-7
    assert report.min_probability >= -1e-9
    assert report.n_c_general == pytest.approx(0.0, abs=1e-8)


def test_negative_rate_witness(report):
    witness = report.witness
    assert (witness.row, witness.column) == (0, 1)
    assert witness.rate == pytest.approx(-0.1, abs=1e-6)
    assert min(abs(witness.t - math.pi), abs(witness.t - 3.0 * math.pi)) < 1e-3
    assert witness.kolmogorov.reason == "negative off-diagonal rate"


def test_report_document(report):
    document = report.to_dict()
    assert document["schema"] == 1
    assert document["verdict"] == report.verdict
    assert document["model"] == {"gamma1": "const:1.0", "gamma2": "cos:1.0,0.9,1.0"}
    assert len(document["trajectory"]["t"]) == len(document["trajectory"]["dk_ode"])


def test_demonstrate_rejects_markovian_rates():
    with pytest.raises(ValidationError, match="not a counterexample"):
        demonstrate(TwoRateModel(ConstantRate(1.0), ConstantRate(1.0)), 5.0)


def test_demonstrate_rejects_invalid_model():
    with pytest.raises(ValidationError, match="invalid two-rate model"):
        demonstrate(TwoRateModel(ConstantRate(1.0), parse_rate("cos:1,0")), 2.0 * math.pi)


def test_nonnegative_integral_does_not_guarantee_positivity():
    model = TwoRateModel(ConstantRate(1.0), parse_rate("cos:1,0.5"))
    validation = validate_model(model, t_end=2.0 * math.pi)
    assert not any(v.startswith("∫γ₂") for v in validation.violations)
    assert any(v.startswith("positivity lost") for v in validation.violations)
    with pytest.raises(ValidationError, match="positivity lost"):
        demonstrate(model, 2.0 * math.pi)


def test_default_model_keeps_probabilities_nonnegative(report):
    assert report.min_probability >= -1e-12
    validation = validate_model(default_model(), t_end=12.0 * math.pi)
    assert validation.ok
