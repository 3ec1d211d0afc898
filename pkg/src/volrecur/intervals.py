"""Thresholds from mean recurrence times and recurrence-interval extraction."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ConfigError, InsufficientData
from .volatility import VolatilitySeries

DEFAULT_TAUS = (20, 25, 40, 60, 80, 100)


@dataclass(frozen=True)
class IntervalSample:
    """Recurrence intervals of one threshold.

    ``raw`` holds integer waiting times in slots, ``scaled`` the same values
    divided by ``tau_q``. ``positions`` are the series indices of the
    exceedances and ``series_len`` the length of the series they came from.
    """

    tau_q: float
    threshold: float
    raw: np.ndarray
    positions: np.ndarray
    series_len: int

    @property
    def scaled(self) -> np.ndarray:
        return self.raw / self.tau_q

    @property
    def n(self) -> int:
        return len(self.raw)


def _values(v) -> np.ndarray:
    return v.values if isinstance(v, VolatilitySeries) else np.asarray(v, dtype=float)


def expected_exceedances(n: int, tau_q: float) -> int:
    """floor(n / tau_q), exact for decimal tau_q."""
    return math.floor(Fraction(n) / Fraction(str(float(tau_q))))


def threshold_for_mean_interval(v, tau_q: float) -> float:
    """Threshold Q whose strict exceedances number floor(n / tau_q).

    Q is the ceil(n (1 − 1/tau_q))-th order statistic; with ties in the
    data the exceedance count can only be smaller.
    """
    x = _values(v)
    n = len(x)
    if not 1 < tau_q < n:
        raise ConfigError(f"tau_q must lie in (1, {n}), got {tau_q}")
    rank = n - expected_exceedances(n, tau_q)  # 1-based order statistic
    return float(np.partition(x, rank - 1)[rank - 1])


def extract_intervals(v, threshold: float, tau_q: float) -> IntervalSample:
    """Waiting times between consecutive values strictly above ``threshold``.

    Positions are series indices, so intervals run straight across day
    boundaries.
    """
    x = _values(v)
    pos = np.flatnonzero(x > threshold)
    if len(pos) < 2:
        raise InsufficientData(f"{len(pos)} exceedances of Q={threshold}; need at least 2")
    return IntervalSample(float(tau_q), float(threshold), np.diff(pos), pos, len(x))


def intervals_for_tau(v, tau_q: float) -> IntervalSample:
    return extract_intervals(v, threshold_for_mean_interval(v, tau_q), tau_q)


def sweep_tau(v, tau_list: Sequence[float] = DEFAULT_TAUS) -> list[IntervalSample]:
    return [intervals_for_tau(v, tau) for tau in tau_list]
