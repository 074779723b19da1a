"""
    Parameter sweeps of N_C: special Erlang waiting times of growing order, and
    the convolution of two equal mixtures of exponentials for varying weight.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd
from scipy import stats

from NonMarkov.errors import ValidationError
from NonMarkov.measure.nonmarkov_measure import n_c_twosite
from NonMarkov.semimarkov.two_site import q_time_domain
from NonMarkov.settings import DEFAULT_TAIL_TOL, THREADS_ENV_VAR
from NonMarkov.waiting_time.waiting_time import Erlang, WaitingTimeSpec, mixture_spec

__all__ = ["SWEEP_COLUMNS", "LinearFit", "resolve_workers", "erlang_sweep", "mixture_sweep", "mixture_q_curves",
           "linear_fit"]

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["param", "n_c", "tail_bound", "horizon"]


def resolve_workers(workers: Optional[int] = None) -> int:
    '''
    Number of worker processes: the explicit value, else NMK_THREADS, else
    the number of cores.
    '''
    if workers is None:
        configured = os.environ.get(THREADS_ENV_VAR)
        if configured:
            try:
                workers = int(configured)
            except ValueError:
                raise ValidationError(f"{THREADS_ENV_VAR} must be an integer, got '{configured}'")
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ValidationError("worker count must be at least 1")
    return workers


def __sweep_point(job) -> dict:
    param, spec, tail_tol = job
    report = n_c_twosite(spec, tail_tol)
    return {"param": param, "n_c": report.n_c, "tail_bound": report.tail_bound, "horizon": report.horizon}


def __run(jobs: List, workers: Optional[int]) -> pd.DataFrame:
    workers = min(resolve_workers(workers), max(len(jobs), 1))
    if workers == 1:
        rows = []
        for job in jobs:
            rows.append(__sweep_point(job))
            logger.info("param %g: N_C = %.10g", rows[-1]["param"], rows[-1]["n_c"])
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            # map keeps the parameter order whatever the completion order
            rows = list(executor.map(__sweep_point, jobs))
        for row in rows:
            logger.info("param %g: N_C = %.10g", row["param"], row["n_c"])
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def erlang_sweep(n_max: int, lam: float = 1.0, tail_tol: float = DEFAULT_TAIL_TOL,
                 workers: Optional[int] = None) -> pd.DataFrame:
    '''
    N_C for the special Erlang waiting times of order n = 1 .. n_max.

    Returns:
        DataFrame with columns param (= n), n_c, tail_bound, horizon.
    '''
    if n_max < 1:
        raise ValidationError("n_max must be at least 1")
    if not lam > 0:
        raise ValidationError("rate must be positive")
    jobs = [(n, Erlang(n, lam), tail_tol) for n in range(1, n_max + 1)]
    return __run(jobs, workers)


def mixture_sweep(mus: Iterable[float], lambda1: float, ratio: float, tail_tol: float = DEFAULT_TAIL_TOL,
                  workers: Optional[int] = None) -> pd.DataFrame:
    '''
    N_C for f = h * h with h a mixture of exponentials of rates lambda1 and
    ratio * lambda1 and weights mu, 1 - mu.

    Returns:
        DataFrame with columns param (= mu), n_c, tail_bound, horizon.
    '''
    mus = [float(mu) for mu in mus]
    if not mus:
        raise ValidationError("no mixture weights given")
    if not lambda1 > 0 or not ratio > 0:
        raise ValidationError("rate must be positive")
    jobs = [(mu, mixture_spec(mu, lambda1, ratio), tail_tol) for mu in mus]
    return __run(jobs, workers)


def mixture_q_curves(mus: Iterable[float], lambda1: float, ratio: float, grid) -> pd.DataFrame:
    """|q(t)| on the grid for every mu; columns t and one 'mu=<value>' column per weight."""
    grid = np.asarray(grid, dtype=float)
    curves = {"t": grid}
    for mu in mus:
        spec: WaitingTimeSpec = mixture_spec(float(mu), lambda1, ratio)
        curves[f"mu={float(mu):g}"] = np.abs(q_time_domain(spec).q(grid))
    return pd.DataFrame(curves)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float
    n_min: int


def linear_fit(table: pd.DataFrame, n_min: int = 4) -> LinearFit:
    """Least squares line of n_c against param over param >= n_min."""
    selected = table[table["param"] >= n_min]
    if len(selected) < 2:
        raise ValidationError(f"linear fit needs at least two sweep points with n >= {n_min}")
    fit = stats.linregress(selected["param"].to_numpy(dtype=float), selected["n_c"].to_numpy(dtype=float))
    return LinearFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2), n_min)
