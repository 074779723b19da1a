"""
    Time dependent rates gamma(t) for the two-rate model, written on the
    command line as

        const:a            a
        cos:b,a[,w]        a + b cos(w t)
        sin:b,a[,w]        a + b sin(w t)
        table:PATH         two-column CSV "t,rate", linear interpolation
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
import pandas as pd

from NonMarkov.errors import ValidationError
from NonMarkov.settings import RATE_FORM_NAMES, RateForm

__all__ = ["ConstantRate", "SinusoidRate", "TabulatedRate", "RateFunction", "parse_rate"]


@dataclass(frozen=True)
class ConstantRate:
    value: float

    form = RateForm.CONSTANT
    period = None

    def __call__(self, t):
        return np.full(np.shape(t), float(self.value)) if np.ndim(t) else float(self.value)

    def integral(self, t):
        return self.value * np.asarray(t, dtype=float) if np.ndim(t) else self.value * float(t)

    def describe(self) -> str:
        return f"const:{self.value!r}"


@dataclass(frozen=True)
class SinusoidRate:
    amplitude: float
    offset: float
    omega: float = 1.0
    form: RateForm = RateForm.COSINE

    def __post_init__(self):
        if not self.omega > 0:
            raise ValidationError("sinusoid frequency must be positive")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def __call__(self, t):
        phase = self.omega * np.asarray(t, dtype=float)
        wave = np.cos(phase) if self.form == RateForm.COSINE else np.sin(phase)
        value = self.offset + self.amplitude * wave
        return value if np.ndim(t) else float(value)

    def integral(self, t):
        times = np.asarray(t, dtype=float)
        phase = self.omega * times
        if self.form == RateForm.COSINE:
            wave = np.sin(phase)
        else:
            wave = 1.0 - np.cos(phase)
        value = self.offset * times + self.amplitude / self.omega * wave
        return value if np.ndim(t) else float(value)

    def describe(self) -> str:
        name = "cos" if self.form == RateForm.COSINE else "sin"
        return f"{name}:{self.amplitude!r},{self.offset!r},{self.omega!r}"


@dataclass(frozen=True, eq=False)
class TabulatedRate:
    times: np.ndarray
    values: np.ndarray
    source: str = ""

    form = RateForm.TABULATED
    period = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
            raise ValidationError("rate table needs at least two strictly increasing times")
        if len(self.values) != len(times):
            raise ValidationError("rate table columns differ in length")

    def __call__(self, t):
        value = np.interp(t, self.times, self.values)
        return value if np.ndim(t) else float(value)

    def integral(self, t) -> None:
        """No closed form; callers integrate numerically."""
        return None

    def describe(self) -> str:
        return f"table:{self.source}"


RateFunction = Union[ConstantRate, SinusoidRate, TabulatedRate]


def parse_rate(text: str) -> RateFunction:
    if ":" not in text:
        raise ValidationError(f"rate '{text}' must look like 'const:a', 'cos:b,a[,w]', 'sin:b,a[,w]' or 'table:PATH'")
    name, argument = text.split(":", 1)
    form = RATE_FORM_NAMES.get(name.strip())
    if form is None:
        raise ValidationError(f"unknown rate form '{name}'")

    if form == RateForm.TABULATED:
        return __read_table(argument.strip())

    try:
        numbers = [float(part) for part in argument.split(",")]
    except ValueError:
        raise ValidationError(f"rate '{text}' has a non-numeric parameter")
    if form == RateForm.CONSTANT:
        if len(numbers) != 1:
            raise ValidationError("const takes one parameter")
        return ConstantRate(numbers[0])
    if len(numbers) not in (2, 3):
        raise ValidationError(f"{name} takes amplitude, offset and an optional frequency")
    return SinusoidRate(*numbers, form=form)


def __read_table(path: str) -> TabulatedRate:
    try:
        table = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as e:
        raise ValidationError(f"cannot read rate table {path}: {e}")
    if list(table.columns[:2]) != ["t", "rate"]:
        raise ValidationError(f"rate table {path} needs the columns 't,rate'")
    return TabulatedRate(table["t"].to_numpy(dtype=float), table["rate"].to_numpy(dtype=float), path)
