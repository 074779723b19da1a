"""
    SVG figures of the sweeps: N_C against the Erlang order, and N_C against the
    mixture weight next to the |q(t)| curves.
"""

import logging
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd
import seaborn as sns

from NonMarkov.measure.sweeps import LinearFit

__all__ = ["plot_erlang_sweep", "plot_mixture_sweep"]

logger = logging.getLogger(__name__)

sns.set_theme()
plt.rcParams["svg.hashsalt"] = "nonmarkov"
plt.rcParams["svg.fonttype"] = "none"


def __save(figure, path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(path, format="svg", metadata={"Date": None})
    plt.close(figure)
    logger.info("wrote %s", path)


def plot_erlang_sweep(table: pd.DataFrame, path: Path, lam: float, fit: Optional[LinearFit] = None):
    figure, ax = plt.subplots(figsize=(6, 4))
    sns.lineplot(data=table, x="param", y="n_c", marker="o", ax=ax)
    ax.set_xlabel("n")
    ax.set_ylabel("N_C")
    caption = f"special Erlang waiting times, lambda = {lam:g}"
    if fit is not None:
        caption += f"\nlinear fit n >= {fit.n_min}: slope {fit.slope:.4g}, R^2 = {fit.r_squared:.4f}"
    ax.set_title(caption, fontsize=9)
    figure.tight_layout()
    __save(figure, path)


def plot_mixture_sweep(table: pd.DataFrame, curves: pd.DataFrame, path: Path, lambda1: float, ratio: float):
    figure, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    long = curves.melt(id_vars="t", var_name="weight", value_name="abs_q")
    sns.lineplot(data=long, x="t", y="abs_q", hue="weight", ax=left)
    left.set_xlabel("t")
    left.set_ylabel("|q(t)|")
    sns.lineplot(data=table, x="param", y="n_c", marker="o", ax=right)
    right.set_xlabel("mu")
    right.set_ylabel("N_C")
    figure.suptitle(f"convolution of two equal mixtures, lambda1 = {lambda1:g}, lambda2/lambda1 = {ratio:g}",
                    fontsize=9)
    figure.tight_layout()
    __save(figure, path)
