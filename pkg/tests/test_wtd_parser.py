import numpy as np
import pytest

from NonMarkov.errors import ValidationError, WtdSyntaxError
from NonMarkov.waiting_time import (Branch, Convolution, Erlang, Exponential, Mixture, format_wtd, mixture_spec,
                                    parse_wtd, validate)


def test_parse_leaves():
    assert parse_wtd("exp(1)") == Exponential(1.0)
    assert parse_wtd("erlang(2,1)") == Erlang(2, 1.0)
    assert parse_wtd(" erlang( 3 , 2.5e-1 ) ") == Erlang(3, 0.25)


def test_parse_mixture_convolution():
    text = "conv(mix(0.1:exp(1),0.9:exp(5)),mix(0.1:exp(1),0.9:exp(5)))"
    assert parse_wtd(text) == mixture_spec(0.1, 1.0, 5.0)


def test_parse_nested():
    spec = parse_wtd("conv(exp(1), mix(0.5: erlang(2, 3), 0.5: exp(2)), exp(4))")
    assert spec == Convolution((Exponential(1.0),
                                Mixture((Branch(0.5, Erlang(2, 3.0)), Branch(0.5, Exponential(2.0)))),
                                Exponential(4.0)))


def test_syntax_only():
    # semantic problems are left to validate
    spec = parse_wtd("exp(-1)")
    assert spec == Exponential(-1.0)
    assert validate(spec) == ["rate must be positive"]


@pytest.mark.parametrize("text, message", [
    ("mix(0.5 exp(1))", "expected ':' at col 9"),
    ("gamma(2)", "unknown distribution 'gamma' at col 1"),
    ("exp(1) x", "unexpected trailing input at col 8"),
    ("erlang(2.5,1)", "expected integer at col 8"),
    ("exp()", "expected number at col 5"),
    ("conv(exp(1))", "expected ',' at col 12"),
    ("mix(1.0:exp(3))", "expected ',' at col 15"),
    ("exp(1", "expected ')' at col 6"),
])
def test_syntax_errors(text, message):
    with pytest.raises(WtdSyntaxError) as info:
        parse_wtd(text)
    assert str(info.value) == message


def test_syntax_error_position_and_type():
    with pytest.raises(ValidationError) as info:
        parse_wtd("conv(exp(1),\n  exp(2) exp(3))")
    assert info.value.line == 2
    assert info.value.column == 10


def test_canonical_printer():
    spec = parse_wtd("conv(mix(0.1:exp(1),0.9:exp(5)), erlang(2, 3))")
    assert format_wtd(spec) == "conv(mix(0.1:exp(1.0),0.9:exp(5.0)),erlang(2,3.0))"
    assert parse_wtd(format_wtd(spec)) == spec


def random_spec(rng, depth):
    kind = rng.integers(2 if depth == 0 else 4)
    if kind == 0:
        return Exponential(float(rng.lognormal(0.0, 2.0)))
    if kind == 1:
        return Erlang(int(rng.integers(1, 5)), float(rng.lognormal(0.0, 2.0)))
    size = int(rng.integers(2, 5))
    if kind == 2:
        return Convolution(tuple(random_spec(rng, depth - 1) for _ in range(size)))
    weights = rng.dirichlet(np.ones(size))
    return Mixture(tuple(Branch(float(w), random_spec(rng, depth - 1)) for w in weights))


def test_random_specs_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        spec = random_spec(rng, int(rng.integers(0, 4)))
        assert parse_wtd(format_wtd(spec)) == spec
