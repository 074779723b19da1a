import math

import numpy as np
import pytest
from scipy.sparse.linalg import expm_multiply

from NonMarkov.maps import MapFamily, kolmogorov_distance
from NonMarkov.measure import n_c_general, n_c_quadrature, n_c_twosite, sigma
from NonMarkov.semimarkov import critical_structure, q_time_domain, twosite_family
from NonMarkov.waiting_time import Branch, Erlang, Exponential, Mixture, mixture_spec, scaled

ERLANG2_N_C = math.exp(-math.pi) / (1.0 - math.exp(-math.pi))


@pytest.fixture(scope="module")
def erlang2():
    return q_time_domain(Erlang(2, 1.0))


@pytest.fixture
def identity_family():
    return MapFamily(evaluator=lambda t: np.eye(3), t_max=10.0, dimension=3)


def test_markovian_process_has_no_memory():
    report = n_c_twosite(Exponential(1.0))
    assert report.n_c == 0.0
    assert report.increase_intervals == []


def test_erlang2_value():
    report = n_c_twosite(Erlang(2, 1.0))
    assert report.n_c == pytest.approx(ERLANG2_N_C, abs=1e-6)
    assert report.n_c == pytest.approx(0.045, abs=1e-3)
    assert report.tail_bound < 1e-10
    assert all(c > 0 for c in report.contributions)
    assert report.n_c == pytest.approx(math.fsum(report.contributions), abs=1e-12)
    # increments |q(k pi)| = exp(-k pi)
    np.testing.assert_allclose(report.contributions[:3], np.exp(-np.pi * np.arange(1, 4)), rtol=1e-9)


@pytest.mark.parametrize("spec", [
    Mixture((Branch(0.5, Exponential(1.0)), Branch(0.5, Exponential(5.0)))),
    Mixture((Branch(0.1, Exponential(1.0)), Branch(0.9, Exponential(5.0)))),
])
def test_monotone_distance(spec):
    assert n_c_twosite(spec).n_c == pytest.approx(0.0, abs=1e-10)


def phase_type_q(mu, lambda1, ratio, times):
    '''
    q(t) of the two-site process with waiting time h * h, h a mixture of
    exponentials, from the equivalent Markov chain on (site, stage, phase).
    '''
    rates, weights = np.array([lambda1, ratio * lambda1]), np.array([mu, 1.0 - mu])
    A = np.zeros((8, 8))
    for site in (0, 1):
        for stage in (0, 1):
            for phase in (0, 1):
                source = 4 * site + 2 * stage + phase
                target_site, target_stage = (site, 1) if stage == 0 else (1 - site, 0)
                A[source, source] -= rates[phase]
                for entry in (0, 1):
                    A[4 * target_site + 2 * target_stage + entry, source] += rates[phase] * weights[entry]
    p0 = np.zeros(8)
    p0[:2] = weights
    p = expm_multiply(A, p0, start=times[0], stop=times[-1], num=len(times), endpoint=True)
    return p[:, :4].sum(axis=1) - p[:, 4:].sum(axis=1)


@pytest.mark.parametrize("mu, expected", [(0.1, 0.014368), (0.5, 2.46e-4)])
def test_mixture_measure_against_markov_embedding(mu, expected):
    times = np.linspace(0.0, 60.0, 60001)
    q = phase_type_q(mu, 1.0, 5.0, times)
    qf = q_time_domain(mixture_spec(mu, 1.0, 5.0))
    np.testing.assert_allclose(qf.q(times[::100]), q[::100], atol=1e-10)

    rises = np.diff(np.abs(q))
    oracle = rises[rises > 0].sum()
    assert oracle > 0
    assert n_c_twosite(mixture_spec(mu, 1.0, 5.0)).n_c == pytest.approx(oracle, abs=5e-6)
    assert oracle == pytest.approx(expected, abs=5e-6)


@pytest.mark.parametrize("c", [0.1, 10.0])
@pytest.mark.parametrize("spec", [Erlang(2, 1.0), Erlang(4, 1.0), mixture_spec(0.1, 1.0, 5.0)])
def test_rate_invariance(spec, c):
    assert n_c_twosite(scaled(spec, c)).n_c == pytest.approx(n_c_twosite(spec).n_c, abs=1e-8)


@pytest.mark.parametrize("spec", [Erlang(2, 1.0), Erlang(5, 1.0), mixture_spec(0.1, 1.0, 5.0)])
def test_interval_sum_matches_quadrature(spec):
    qf = q_time_domain(spec)
    structure = critical_structure(qf, 1e-10)
    assert n_c_quadrature(qf, structure) == pytest.approx(n_c_twosite(spec, qf=qf).n_c, abs=1e-9)


def test_report_document():
    document = n_c_twosite(Erlang(2, 1.0)).to_dict()
    assert document["schema"] == 1
    assert document["lower_bound"] is False
    assert document["maximizing_pair"] == [[1.0, 0.0], [0.0, 1.0]]
    assert len(document["increase_intervals"]) == len(document["contributions"])


def test_general_measure_matches_two_site(erlang2):
    grid = np.linspace(0.0, 30.0, 60001)
    report = n_c_general(twosite_family(erlang2, 30.0), grid)
    assert report.n_c == pytest.approx(ERLANG2_N_C, abs=1e-4)
    assert not report.lower_bound
    assert math.isnan(report.tail_bound)
    np.testing.assert_allclose(report.maximizing_pair[0], [1.0, 0.0])
    assert report.increase_intervals[0][0] == pytest.approx(3.0 * math.pi / 4.0, abs=1e-3)


def test_general_measure_identity(identity_family):
    report = n_c_general(identity_family, np.linspace(0.0, 10.0, 101))
    assert report.n_c == 0.0
    assert report.lower_bound
    assert report.diagnostics["pairs"] == 3


def test_vertex_pairs_scale_with_initial_distance(erlang2):
    rng = np.random.default_rng(8)
    for t in (0.5, 2.0, 4.0):
        m = twosite_family(erlang2, 10.0)(t)
        for _ in range(5):
            p1, p2 = rng.dirichlet([1.0, 1.0]), rng.dirichlet([1.0, 1.0])
            expected = abs(erlang2.q(t)) * kolmogorov_distance(p1, p2)
            assert kolmogorov_distance(m @ p1, m @ p2) == pytest.approx(expected, abs=1e-14)


def test_sigma_examples(erlang2, identity_family):
    pair = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    markovian = twosite_family(q_time_domain(Exponential(1.0)), 10.0)
    for t in (0.5, 1.0, 3.0):
        assert sigma(markovian, pair, t, 1e-5) == pytest.approx(-2.0 * math.exp(-2.0 * t), rel=1e-6)

    basis = (np.eye(3)[0], np.eye(3)[2])
    assert sigma(identity_family, basis, 1.0, 1e-5) == 0.0

    family = twosite_family(erlang2, 10.0)
    for t in (2.5, 2.8, 3.0):
        assert sigma(family, pair, t, 1e-5) > 0
