"""Absolute log-return volatility, intraday deseasonalization, normalization."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, InsufficientData, MissingSlot, ZeroVariance
from .io import PriceSeries

RAW = "raw"
DESEASONALIZED = "deseasonalized"
NORMALIZED = "normalized"
STAGES = (RAW, DESEASONALIZED, NORMALIZED)


@dataclass(frozen=True)
class VolatilitySeries:
    day: np.ndarray
    slot: np.ndarray
    values: np.ndarray
    stage: str
    slots_per_day: int

    def __post_init__(self):
        for name, dtype in (("day", np.int64), ("slot", np.int64), ("values", float)):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=dtype))
        if self.stage not in STAGES:
            raise DataError(f"unknown stage {self.stage!r}")
        if not (len(self.day) == len(self.slot) == len(self.values)):
            raise DataError("day, slot and values arrays differ in length")
        if np.any(self.values < 0):
            raise DataError("volatility values must be non-negative")

    def __len__(self):
        return len(self.values)

    def window(self, start: int, stop: int) -> "VolatilitySeries":
        return replace(self, day=self.day[start:stop], slot=self.slot[start:stop],
                       values=self.values[start:stop])


@dataclass(frozen=True)
class IntradayPattern:
    """Mean volatility per slot of day; NaN marks slots never observed."""

    mean: np.ndarray
    day_count: int

    @property
    def slots_per_day(self) -> int:
        return len(self.mean)


def log_abs_returns(prices: PriceSeries, cross_day: bool = False, gaps: str = "span") -> VolatilitySeries:
    """Minute volatility ω(t) = |ln p(t) − ln p(t−1)| over consecutive records.

    With ``cross_day=False`` the first record of each day yields no return,
    so overnight gaps are excluded. ``gaps`` controls returns across missing
    intraday slots: ``"span"`` keeps them as one return, ``"drop"`` omits them.
    """
    if len(prices) < 2:
        raise InsufficientData("need at least 2 price records")
    if gaps not in ("span", "drop"):
        raise DataError(f"gaps must be 'span' or 'drop', got {gaps!r}")
    logp = np.log(prices.price)
    omega = np.abs(np.diff(logp))
    keep = np.ones(len(omega), dtype=bool)
    if not cross_day:
        keep &= prices.day[1:] == prices.day[:-1]
    if gaps == "drop":
        same_day = prices.day[1:] == prices.day[:-1]
        keep &= ~same_day | (prices.slot[1:] == prices.slot[:-1] + 1)
    return VolatilitySeries(prices.day[1:][keep], prices.slot[1:][keep], omega[keep], RAW,
                            prices.slots_per_day)


def intraday_pattern(vol: VolatilitySeries) -> IntradayPattern:
    if len(vol) == 0:
        raise InsufficientData("empty volatility series")
    S = vol.slots_per_day
    total = np.bincount(vol.slot, weights=vol.values, minlength=S)
    count = np.bincount(vol.slot, minlength=S)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    return IntradayPattern(mean, int(len(np.unique(vol.day))))


def deseasonalize(vol: VolatilitySeries, pattern: IntradayPattern) -> VolatilitySeries:
    """Divide each value by its slot's mean, ω′ = ω / A(s).

    Slots whose mean is exactly zero produce zeros rather than an error.
    """
    if pattern.slots_per_day != vol.slots_per_day:
        raise DataError("pattern and series have different slots_per_day")
    A = pattern.mean[vol.slot]
    if np.any(np.isnan(A)):
        s = int(vol.slot[np.isnan(A)][0])
        raise MissingSlot(f"slot {s} has no intraday mean in the pattern")
    out = np.divide(vol.values, A, out=np.zeros_like(vol.values), where=A > 0)
    return replace(vol, values=out, stage=DESEASONALIZED)


def normalize(vol: VolatilitySeries) -> VolatilitySeries:
    """Scale to unit standard deviation, sqrt(<x²> − <x>²), without centering."""
    x = vol.values
    if len(x) == 0:
        raise InsufficientData("empty volatility series")
    sigma = np.sqrt(max(np.mean(x * x) - np.mean(x) ** 2, 0.0))
    if not sigma > 0 or np.all(x == x[0]):
        raise ZeroVariance("volatility series has zero variance")
    return replace(vol, values=x / sigma, stage=NORMALIZED)


def preprocess(prices: PriceSeries, cross_day: bool = False, gaps: str = "span") -> dict:
    """Run the full chain and return every stage plus the pattern."""
    raw = log_abs_returns(prices, cross_day=cross_day, gaps=gaps)
    pattern = intraday_pattern(raw)
    des = deseasonalize(raw, pattern)
    return {"raw": raw, "pattern": pattern, "deseasonalized": des, "normalized": normalize(des)}


def to_normalized(vol: VolatilitySeries) -> VolatilitySeries:
    """Bring any-stage series to the normalized stage using its own pattern."""
    if vol.stage == RAW:
        vol = deseasonalize(vol, intraday_pattern(vol))
    if vol.stage == DESEASONALIZED:
        vol = normalize(vol)
    return vol
