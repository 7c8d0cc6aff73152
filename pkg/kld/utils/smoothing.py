"""
Smoothing and differentiation of the divergence sequence
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from statsmodels.nonparametric.smoothers_lowess import lowess as _sm_lowess

from kld.errors import ConfigError, SeriesError

MOVING_AVERAGE = "ma"
LOWESS = "lowess"

DEFAULT_WINDOW = 5
DEFAULT_FRAC = 0.05
DEFAULT_ITERS = 1

# fewest neighbours a local linear fit is run with
_MIN_NEIGHBOURS = 3


@dataclass(frozen=True)
class SmootherConfig:
    """Smoother selection, written on the command line as 'ma:5' or 'lowess:0.05:1'"""
    kind: str = MOVING_AVERAGE
    window: int = DEFAULT_WINDOW
    frac: float = DEFAULT_FRAC
    iters: int = DEFAULT_ITERS

    def __post_init__(self):
        if self.kind not in (MOVING_AVERAGE, LOWESS):
            raise ConfigError(f"unknown smoother '{self.kind}' (expected ma or lowess)")
        if self.window < 1:
            raise ConfigError(f"moving-average window must be >= 1, got {self.window}")
        if not 0 < self.frac <= 1:
            raise ConfigError(f"lowess frac must lie in (0, 1], got {self.frac}")
        if self.iters < 0:
            raise ConfigError(f"lowess iterations must be >= 0, got {self.iters}")

    @property
    def causal(self) -> bool:
        return self.kind == MOVING_AVERAGE

    @classmethod
    def parse(cls, text: str) -> "SmootherConfig":
        kind, _, rest = text.strip().partition(":")
        params = [part for part in rest.split(":") if part] if rest else []
        try:
            if kind == MOVING_AVERAGE:
                if len(params) > 1:
                    raise ValueError("expected ma:<window>")
                return cls(kind=kind, window=int(params[0]) if params else DEFAULT_WINDOW)
            if kind == LOWESS:
                if len(params) > 2:
                    raise ValueError("expected lowess:<frac>:<iters>")
                frac = float(params[0]) if params else DEFAULT_FRAC
                iters = int(params[1]) if len(params) > 1 else DEFAULT_ITERS
                return cls(kind=kind, frac=frac, iters=iters)
        except ValueError as e:
            raise ConfigError(f"invalid smoother '{text}': {e}") from e
        raise ConfigError(f"unknown smoother '{text}' (expected ma:<window> or lowess:<frac>:<iters>)")

    def __str__(self) -> str:
        if self.kind == MOVING_AVERAGE:
            return f"ma:{self.window}"
        return f"lowess:{self.frac!r}:{self.iters}"


def trailing_mean(series: Sequence[float], k: int, window: int) -> float:
    """Mean of series[max(0, k - window + 1) .. k]"""
    return float(np.mean(np.asarray(series[max(0, k - window + 1): k + 1], dtype=np.float64)))


def moving_average(series: Sequence[float], window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Causal trailing moving average; out[k] only depends on series[..k]"""
    if window < 1:
        raise ConfigError(f"moving-average window must be >= 1, got {window}")
    values = np.asarray(series, dtype=np.float64)
    if len(values) == 0:
        raise SeriesError("cannot smooth an empty series")
    return np.array([trailing_mean(values, k, window) for k in range(len(values))])


def lowess(series: Sequence[float], frac: float = DEFAULT_FRAC, iters: int = DEFAULT_ITERS) -> np.ndarray:
    """
    Locally weighted linear regression (tricube kernel, bisquare robustness)

    Args:
        series: values observed at unit spacing
        frac: share of the points used in each local fit, in (0, 1]
        iters: number of robustness reweighting passes

    Returns:
        smoothed values, same length as the input
    """
    if not 0 < frac <= 1:
        raise ConfigError(f"lowess frac must lie in (0, 1], got {frac}")
    if iters < 0:
        raise ConfigError(f"lowess iterations must be >= 0, got {iters}")
    values = np.asarray(series, dtype=np.float64)
    n = len(values)
    if n < 2:
        raise SeriesError(f"lowess needs at least 2 points, got {n}")

    frac = min(1.0, max(frac, _MIN_NEIGHBOURS / n))
    return _sm_lowess(
        values,
        np.arange(n, dtype=np.float64),
        frac=frac,
        it=iters,
        delta=0.0,
        is_sorted=True,
        return_sorted=False,
    )


def first_derivative(series: Sequence[float]) -> np.ndarray:
    """l[k] = series[k+1] - series[k]"""
    values = np.asarray(series, dtype=np.float64)
    if len(values) < 2:
        raise SeriesError(f"first derivative needs at least 2 points, got {len(values)}")
    return np.diff(values)


def min_max_normalize(series: Sequence[float]) -> np.ndarray:
    """Global min-max scaling to [0, 1]; a constant series maps to zeros"""
    values = np.asarray(series, dtype=np.float64)
    if len(values) == 0:
        return values
    low, high = values.min(), values.max()
    if high == low:
        return np.zeros_like(values)
    return (values - low) / (high - low)


def running_normalize(value: float, low: float, high: float) -> float:
    """Scale one value against the running min/max seen so far, clamped to [0, 1]"""
    if high == low or math.isnan(value):
        return 0.0
    return min(1.0, max(0.0, (value - low) / (high - low)))


def smooth(series: Sequence[float], config: SmootherConfig) -> np.ndarray:
    if config.kind == MOVING_AVERAGE:
        return moving_average(series, config.window)
    return lowess(series, config.frac, config.iters)
