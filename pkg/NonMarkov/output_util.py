"""
    Deterministic writers for the CSV, JSON and YAML artifacts.
"""

import copy
import json
import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pyaml

from NonMarkov.settings import FLOAT_FORMAT

__all__ = ["write_csv", "to_json", "write_json", "dump_run_arguments"]

logger = logging.getLogger(__name__)


def write_csv(table: pd.DataFrame, path: Path):
    '''
    Writes the table with a header row, 17 significant digits and "NaN" for
    missing values, so identical runs give byte-identical files.
    '''
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="NaN", lineterminator="\n")
    logger.info("wrote %s", path)


def __plain(value):
    if isinstance(value, dict):
        return {str(k): __plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [__plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [__plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def to_json(document: dict) -> str:
    """JSON text with non-finite floats as null and shortest round-trip floats."""
    return json.dumps(__plain(document), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(document: dict, path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        file.write(to_json(document))
    logger.info("wrote %s", path)


def dump_run_arguments(args, run_dir: Path):
    '''
    Stores the resolved arguments of a run as run_arguments.yaml in run_dir.
    '''
    run_args = copy.copy(args)
    arguments = {key: (str(value) if isinstance(value, Path) else value)
                 for key, value in run_args.__dict__.items() if key != "config"}
    if getattr(args, "config", None):
        arguments["config"] = str(args.config)
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "run_arguments.yaml", "w") as file:
        pyaml.dump(arguments, file)
    logger.info("wrote %s", run_dir / "run_arguments.yaml")
