"""
Signal-level reference detectors (one-sided CUSUM and EWMA control chart)

Both scan a real-valued signal causally after a warmup prefix that fixes the
in-control mean (and, for EWMA, the standard deviation). They return alarm
onset indices into the signal.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np

from kld.errors import ConfigError, SeriesError

logger = logging.getLogger(__name__)

CUSUM = "cusum"
EWMA = "ewma"

DEFAULT_WARMUP = 50

# control limit used when the warmup prefix is constant
_LIMIT_FLOOR = 1e-12


@dataclass(frozen=True)
class BaselineConfig:
    """Baseline detector parameters.

    cusum reads (kappa, h), ewma reads (lam, c); both use warmup.
    """
    kind: str = CUSUM
    kappa: float = 0.5  # drift allowance
    h: float = 5.0  # alarm threshold
    lam: float = 0.2  # EWMA decay
    c: float = 3.0  # control-limit multiplier
    warmup: int = DEFAULT_WARMUP
    restart: bool = True  # fresh warmup reference after every alarm

    def __post_init__(self):
        if self.kind not in (CUSUM, EWMA):
            raise ConfigError(f"unknown baseline '{self.kind}' (expected cusum or ewma)")
        if self.kappa < 0:
            raise ConfigError(f"cusum drift allowance must be >= 0, got {self.kappa}")
        if not self.h > 0:
            raise ConfigError(f"cusum threshold must be positive, got {self.h}")
        if not 0 < self.lam <= 1:
            raise ConfigError(f"ewma decay must lie in (0, 1], got {self.lam}")
        if not self.c > 0:
            raise ConfigError(f"ewma limit multiplier must be positive, got {self.c}")
        if self.warmup < 2:
            raise ConfigError(f"baseline warmup must be >= 2, got {self.warmup}")

    @classmethod
    def parse(cls, text: str, warmup: int = DEFAULT_WARMUP, restart: bool = True) -> "BaselineConfig":
        """'cusum:<kappa>,<h>' or 'ewma:<lam>,<c>'; omitted values keep their defaults"""
        kind, _, rest = text.strip().partition(":")
        try:
            values = [float(v) for v in rest.split(",") if v.strip()] if rest else []
        except ValueError as e:
            raise ConfigError(f"invalid baseline '{text}': {e}") from e
        if len(values) > 2:
            raise ConfigError(f"invalid baseline '{text}': at most two parameters")

        if kind == CUSUM:
            names = ("kappa", "h")
        elif kind == EWMA:
            names = ("lam", "c")
        else:
            raise ConfigError(f"unknown baseline '{text}' (expected cusum:<kappa>,<h> or ewma:<lam>,<c>)")
        return cls(kind=kind, warmup=warmup, restart=restart, **dict(zip(names, values)))

    @property
    def label(self) -> str:
        if self.kind == CUSUM:
            return f"cusum:{self.kappa!r},{self.h!r}"
        return f"ewma:{self.lam!r},{self.c!r}"

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == CUSUM:
            params = {"kappa": self.kappa, "h": self.h}
        else:
            params = {"lam": self.lam, "c": self.c}
        return {"kind": self.kind, **params, "warmup": self.warmup, "restart": self.restart}


def _prefix(signal: Sequence[float], warmup: int) -> np.ndarray:
    values = np.asarray(signal, dtype=np.float64)
    if len(values) < warmup:
        raise SeriesError(f"signal of length {len(values)} is shorter than the warmup prefix ({warmup})")
    return values


def cusum(signal: Sequence[float], kappa: float, h: float, warmup: int = DEFAULT_WARMUP) -> List[int]:
    """
    One-sided upper CUSUM

    Args:
        signal: observations x_k
        kappa: drift allowance subtracted at every step
        h: alarm threshold on the cumulative statistic
        warmup: length of the prefix estimating the in-control mean

    Returns:
        indices k where g exceeded h; g restarts from 0 after each alarm
    """
    if not h > 0:
        raise ConfigError(f"cusum threshold must be positive, got {h}")
    if kappa < 0:
        raise ConfigError(f"cusum drift allowance must be >= 0, got {kappa}")
    values = _prefix(signal, warmup)
    reference = float(np.mean(values[:warmup]))

    alarms = []
    g = 0.0
    for k in range(warmup, len(values)):
        g = max(0.0, g + values[k] - reference - kappa)
        if g > h:
            alarms.append(k)
            g = 0.0
    return alarms


def ewma(signal: Sequence[float], lam: float, c: float, warmup: int = DEFAULT_WARMUP) -> List[int]:
    """EWMA control chart; returns the indices where z leaves the control limits.

    z starts at the warmup mean; the chart re-arms once z is back inside.
    """
    if not 0 < lam <= 1:
        raise ConfigError(f"ewma decay must lie in (0, 1], got {lam}")
    if not c > 0:
        raise ConfigError(f"ewma limit multiplier must be positive, got {c}")
    values = _prefix(signal, warmup)
    reference = float(np.mean(values[:warmup]))
    sigma = float(np.std(values[:warmup]))
    limit = max(c * sigma * math.sqrt(lam / (2.0 - lam)), _LIMIT_FLOOR)

    alarms = []
    z = reference
    armed = True
    for k in range(warmup, len(values)):
        z = lam * values[k] + (1.0 - lam) * z
        outside = abs(z - reference) > limit
        if outside and armed:
            alarms.append(k)
        armed = not outside
    return alarms


def standardize(signal: Sequence[float], warmup: int = DEFAULT_WARMUP) -> np.ndarray:
    """Scale a signal by its warmup mean and standard deviation"""
    values = _prefix(signal, warmup)
    sigma = float(np.std(values[:warmup]))
    return (values - float(np.mean(values[:warmup]))) / (sigma if sigma > 0 else 1.0)


def _chart(values: np.ndarray, config: BaselineConfig) -> List[int]:
    if config.kind == CUSUM:
        return cusum(values, config.kappa, config.h, config.warmup)
    return ewma(values, config.lam, config.c, config.warmup)


def run_baseline(signal: Sequence[float], config: BaselineConfig) -> List[int]:
    """
    Run a baseline on the warmup-standardized signal, so kappa, h are in sigma units

    With ``config.restart`` every alarm ends the current run: the chart starts
    over on the samples after the alarm, whose first ``warmup`` values become
    the new reference. Otherwise one chart scans the whole signal against the
    initial prefix.
    """
    values = _prefix(signal, config.warmup)
    if not config.restart:
        alarms = _chart(standardize(values, config.warmup), config)
    else:
        alarms = []
        start = 0
        while len(values) - start > config.warmup:
            hits = _chart(standardize(values[start:], config.warmup), config)
            if not hits:
                break
            alarms.append(start + hits[0])
            start += hits[0] + 1
    logger.info(f"Baseline {config.label}: {len(alarms)} alarm(s)")
    return alarms
