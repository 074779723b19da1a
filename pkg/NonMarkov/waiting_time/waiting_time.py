"""
    Waiting time distributions built from exponentials by convolution and
    mixture, with their Laplace transforms, moments and exact samplers.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from NonMarkov.errors import ValidationError
from NonMarkov.laplace.polynomial import Polynomial
from NonMarkov.laplace.rational import RationalFunction
from NonMarkov.settings import NORMALIZATION_TOL, WEIGHT_SUM_TOL

__all__ = ["Exponential", "Erlang", "Convolution", "Branch", "Mixture", "WaitingTimeSpec",
           "laplace", "validate", "check_valid", "mean", "variance", "tree_moments",
           "sample", "sample_many", "scaled", "max_rate", "mixture_spec",
           "spec_to_dict", "spec_from_dict"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Exponential:
    rate: float


@dataclass(frozen=True)
class Erlang:
    n: int
    rate: float


@dataclass(frozen=True)
class Convolution:
    children: Tuple["WaitingTimeSpec", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class Branch:
    weight: float
    child: "WaitingTimeSpec"


@dataclass(frozen=True)
class Mixture:
    branches: Tuple[Branch, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))


WaitingTimeSpec = Union[Exponential, Erlang, Convolution, Mixture]


def validate(spec: WaitingTimeSpec) -> List[str]:
    '''
    Checks the structural invariants of a spec tree and the normalization
    of its Laplace transform.

    Returns:
        The list of violations, empty when the spec is valid.
    '''
    violations = []
    __collect_violations(spec, violations)
    if not violations:
        value = __laplace(spec)(0.0)
        if abs(value - 1.0) > NORMALIZATION_TOL:
            violations.append(f"transform at u=0 is {value:.12g}, not 1")
    return violations


def check_valid(spec: WaitingTimeSpec):
    violations = validate(spec)
    if violations:
        raise ValidationError("invalid waiting time spec: " + "; ".join(violations), violations)


def __collect_violations(spec, violations: List[str]):
    if isinstance(spec, Exponential):
        __check_rate(spec.rate, violations)
    elif isinstance(spec, Erlang):
        if not isinstance(spec.n, (int, np.integer)) or isinstance(spec.n, bool) or spec.n < 1:
            violations.append("erlang order must be a positive integer")
        __check_rate(spec.rate, violations)
    elif isinstance(spec, Convolution):
        if len(spec.children) < 2:
            violations.append("convolution needs at least 2 children")
        for child in spec.children:
            __collect_violations(child, violations)
    elif isinstance(spec, Mixture):
        if len(spec.branches) < 1:
            violations.append("mixture needs at least 1 branch")
            return
        weights = [branch.weight for branch in spec.branches]
        if any(not math.isfinite(w) or w < 0 for w in weights):
            violations.append("weights must be nonnegative")
        else:
            total = math.fsum(weights)
            if abs(total - 1.0) > WEIGHT_SUM_TOL:
                violations.append(f"weights sum to {total:.12g}")
        for branch in spec.branches:
            __collect_violations(branch.child, violations)
    else:
        violations.append(f"unknown spec node {type(spec).__name__}")


def __check_rate(rate, violations: List[str]):
    if not math.isfinite(rate) or rate <= 0:
        violations.append("rate must be positive")


def laplace(spec: WaitingTimeSpec) -> RationalFunction:
    '''
    Laplace transform f^(u) of the waiting time density.

    Exponential(l) -> l/(u+l), Erlang(n, l) -> (l/(u+l))^n, a convolution is
    the product of its children and a mixture the weighted sum of its
    branches.
    '''
    check_valid(spec)
    return __laplace(spec)


def __laplace(spec) -> RationalFunction:
    if isinstance(spec, Exponential):
        return RationalFunction(Polynomial.constant(spec.rate), Polynomial([spec.rate, 1.0]))
    if isinstance(spec, Erlang):
        return RationalFunction(Polynomial.constant(spec.rate ** spec.n),
                                Polynomial([spec.rate, 1.0]).power(spec.n))
    if isinstance(spec, Convolution):
        result = __laplace(spec.children[0])
        for child in spec.children[1:]:
            result = result * __laplace(child)
        return result
    result = __laplace(spec.branches[0].child) * spec.branches[0].weight
    for branch in spec.branches[1:]:
        result = result + __laplace(branch.child) * branch.weight
    return result


def mean(spec: WaitingTimeSpec) -> float:
    """-f^'(0), from the Taylor expansion of the transform."""
    return -laplace(spec).taylor_at_zero(1)[1]


def variance(spec: WaitingTimeSpec) -> float:
    series = laplace(spec).taylor_at_zero(2)
    return 2.0 * series[2] - series[1] ** 2


def tree_moments(spec: WaitingTimeSpec) -> Tuple[float, float]:
    '''
    Mean and variance computed on the tree: convolutions add both, mixtures
    combine the first two raw moments of their branches.
    '''
    if isinstance(spec, Exponential):
        return 1.0 / spec.rate, 1.0 / spec.rate ** 2
    if isinstance(spec, Erlang):
        return spec.n / spec.rate, spec.n / spec.rate ** 2
    if isinstance(spec, Convolution):
        moments = [tree_moments(child) for child in spec.children]
        return math.fsum(m for m, _ in moments), math.fsum(v for _, v in moments)
    first, second = 0.0, 0.0
    for branch in spec.branches:
        m, v = tree_moments(branch.child)
        first += branch.weight * m
        second += branch.weight * (v + m * m)
    return first, second - first * first


def sample(spec: WaitingTimeSpec, rng: np.random.Generator) -> float:
    '''
    One waiting time drawn from spec.

    Exponentials use the inverse CDF -log(1-U)/l; Erlangs and convolutions sum
    the samples of their stages; a mixture picks a branch by weight first.
    '''
    if isinstance(spec, Exponential):
        return -math.log1p(-rng.random()) / spec.rate
    if isinstance(spec, Erlang):
        return math.fsum(-math.log1p(-rng.random()) / spec.rate for _ in range(spec.n))
    if isinstance(spec, Convolution):
        return math.fsum(sample(child, rng) for child in spec.children)
    index = rng.choice(len(spec.branches), p=[branch.weight for branch in spec.branches])
    return sample(spec.branches[index].child, rng)


def sample_many(spec: WaitingTimeSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized sample: size independent waiting times as an array."""
    if isinstance(spec, Exponential):
        return -np.log1p(-rng.random(size)) / spec.rate
    if isinstance(spec, Erlang):
        return (-np.log1p(-rng.random((size, spec.n))) / spec.rate).sum(axis=1)
    if isinstance(spec, Convolution):
        total = np.zeros(size)
        for child in spec.children:
            total += sample_many(child, rng, size)
        return total
    weights = np.array([branch.weight for branch in spec.branches])
    chosen = rng.choice(len(spec.branches), size=size, p=weights / weights.sum())
    out = np.empty(size)
    for index, branch in enumerate(spec.branches):
        mask = chosen == index
        count = int(mask.sum())
        if count:
            out[mask] = sample_many(branch.child, rng, count)
    return out


def scaled(spec: WaitingTimeSpec, factor: float) -> WaitingTimeSpec:
    """The same tree with every rate multiplied by factor (time divided by it)."""
    if isinstance(spec, Exponential):
        return Exponential(spec.rate * factor)
    if isinstance(spec, Erlang):
        return Erlang(spec.n, spec.rate * factor)
    if isinstance(spec, Convolution):
        return Convolution(tuple(scaled(child, factor) for child in spec.children))
    return Mixture(tuple(Branch(branch.weight, scaled(branch.child, factor)) for branch in spec.branches))


def max_rate(spec: WaitingTimeSpec) -> float:
    if isinstance(spec, (Exponential, Erlang)):
        return spec.rate
    if isinstance(spec, Convolution):
        return max(max_rate(child) for child in spec.children)
    return max(max_rate(branch.child) for branch in spec.branches)


def mixture_spec(mu: float, lambda1: float, ratio: float) -> WaitingTimeSpec:
    '''
    Convolution of two equal mixtures h * h with
    h(t) = mu l1 exp(-l1 t) + (1 - mu) l2 exp(-l2 t) and l2 = ratio * l1.
    '''
    if not 0.0 <= mu <= 1.0:
        raise ValidationError(f"mixture weight mu={mu} outside [0, 1]")
    h = Mixture((Branch(mu, Exponential(lambda1)), Branch(1.0 - mu, Exponential(ratio * lambda1))))
    return Convolution((h, h))


def spec_to_dict(spec: WaitingTimeSpec) -> dict:
    if isinstance(spec, Exponential):
        return {"type": "exp", "rate": spec.rate}
    if isinstance(spec, Erlang):
        return {"type": "erlang", "n": spec.n, "rate": spec.rate}
    if isinstance(spec, Convolution):
        return {"type": "conv", "children": [spec_to_dict(child) for child in spec.children]}
    return {"type": "mix", "branches": [{"weight": branch.weight, "child": spec_to_dict(branch.child)}
                                        for branch in spec.branches]}


def spec_from_dict(document: dict) -> WaitingTimeSpec:
    '''
    Inverse of spec_to_dict, used for JSON and YAML spec documents.
    Structural problems raise ValidationError; semantic checks are left to
    validate.
    '''
    if not isinstance(document, dict) or "type" not in document:
        raise ValidationError("spec node must be a mapping with a 'type' key")
    kind = document["type"]
    try:
        if kind == "exp":
            return Exponential(float(document["rate"]))
        if kind == "erlang":
            return Erlang(int(document["n"]), float(document["rate"]))
        if kind == "conv":
            return Convolution(tuple(spec_from_dict(child) for child in document["children"]))
        if kind == "mix":
            return Mixture(tuple(Branch(float(branch["weight"]), spec_from_dict(branch["child"]))
                                 for branch in document["branches"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed '{kind}' node: missing or invalid {e}")
    raise ValidationError(f"unknown spec node type '{kind}'")
