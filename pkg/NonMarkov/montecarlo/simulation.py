"""
    Trajectory level estimate of q(t): simulate the renewal jumps of the
    two-site process and average the parity (-1)^N(t) of the jump count.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from NonMarkov.errors import ValidationError
from NonMarkov.semimarkov.two_site import QFunction
from NonMarkov.settings import MC_ACCEPTANCE, MC_BLOCK_SIZE
from NonMarkov.waiting_time.waiting_time import WaitingTimeSpec, check_valid, sample_many

__all__ = ["EmpiricalQ", "Comparison", "simulate_q", "simulate_jump_times", "compare"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmpiricalQ:
    grid: np.ndarray
    q_hat: np.ndarray
    stderr: np.ndarray
    n_traj: int
    seed: int

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.grid, "q_hat": self.q_hat, "stderr": self.stderr})


def simulate_jump_times(spec: WaitingTimeSpec, t_max: float, rng: np.random.Generator):
    '''
    Jump times of one trajectory up to t_max, drawing waiting times until the
    first jump after t_max.
    '''
    jumps = []
    t = 0.0
    while True:
        t += float(sample_many(spec, rng, 1)[0])
        if t > t_max:
            return np.array(jumps)
        jumps.append(t)


def __parity_block(job) -> np.ndarray:
    '''
    Sum over the trajectories of one block of (-1)^N(t) at every grid point.
    N(t) counts the jumps at times <= t.
    '''
    spec, grid, size, seed_sequence = job
    rng = np.random.Generator(np.random.Philox(seed_sequence))
    t_max = grid[-1]
    clock = np.zeros(size)
    flips = np.zeros((size, len(grid) + 1), dtype=np.uint8)
    alive = np.arange(size)
    while len(alive):
        clock[alive] += sample_many(spec, rng, len(alive))
        alive = alive[clock[alive] <= t_max]
        if len(alive):
            first_index = np.searchsorted(grid, clock[alive], side="left")
            np.bitwise_xor.at(flips, (alive, first_index), 1)
    parity = np.bitwise_and(np.cumsum(flips[:, :-1], axis=1, dtype=np.uint8), 1)
    return (size - 2 * parity.sum(axis=0, dtype=np.int64)).astype(np.int64)


def simulate_q(spec: WaitingTimeSpec, grid, n_traj: int, seed: int, workers: int = 1) -> EmpiricalQ:
    '''
    Monte Carlo estimate of q(t) = P(N(t) even) - P(N(t) odd).

    Trajectories are simulated in blocks of MC_BLOCK_SIZE, block b drawing from
    a Philox stream seeded by the b-th child of SeedSequence(seed), so the
    result is bit-identical for any number of workers.

    Parameters:
        grid:
            Sorted nonnegative times.
        n_traj:
            Number of trajectories, at least 1.
    Returns:
        EmpiricalQ with the exact Bernoulli standard error sqrt((1 - q^2)/M).
    '''
    check_valid(spec)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValidationError("empty grid")
    if np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise ValidationError("grid must be sorted and nonnegative")
    if n_traj < 1:
        raise ValidationError("n_traj must be at least 1")

    n_blocks = math.ceil(n_traj / MC_BLOCK_SIZE)
    sizes = [MC_BLOCK_SIZE] * (n_blocks - 1) + [n_traj - MC_BLOCK_SIZE * (n_blocks - 1)]
    jobs = [(spec, grid, size, child)
            for size, child in zip(sizes, np.random.SeedSequence(seed).spawn(n_blocks))]

    if workers > 1 and n_blocks > 1:
        with ProcessPoolExecutor(max_workers=min(workers, n_blocks)) as executor:
            sums = list(executor.map(__parity_block, jobs))
    else:
        sums = []
        for index, job in enumerate(jobs):
            sums.append(__parity_block(job))
            logger.debug("block %d/%d done", index + 1, n_blocks)

    q_hat = np.sum(sums, axis=0) / n_traj
    stderr = np.sqrt(np.clip(1.0 - q_hat ** 2, 0.0, None) / n_traj)
    return EmpiricalQ(grid, q_hat, stderr, n_traj, seed)


@dataclass(frozen=True)
class Comparison:
    max_deviation: float
    t_at_max: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.threshold

    def to_dict(self) -> dict:
        return {"max_deviation": self.max_deviation,
                "t_at_max": self.t_at_max,
                "threshold": self.threshold,
                "passed": self.passed}


def compare(emp: EmpiricalQ, qf: QFunction, threshold: float = MC_ACCEPTANCE) -> Comparison:
    '''
    Largest normalized deviation |q_hat - q(t)| / stderr over the grid.
    Where the estimate has zero standard error (q_hat = +-1) the deviation is
    0 on an exact match and measured against 1/n_traj otherwise.
    '''
    exact = qf.q(emp.grid)
    difference = np.abs(emp.q_hat - exact)
    scale = np.where(emp.stderr > 0, emp.stderr, 1.0 / emp.n_traj)
    deviation = np.where(difference <= 1e-12, 0.0, difference / scale)
    index = int(np.argmax(deviation))
    return Comparison(float(deviation[index]), float(emp.grid[index]), threshold)
