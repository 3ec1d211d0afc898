"""q-exponential parameters in moving windows and their drift against τ_Q."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, ExponentialBoundary, InsufficientData
from .fitting import fit_qexp
from .intervals import intervals_for_tau
from .volatility import (DESEASONALIZED, NORMALIZED, RAW, VolatilitySeries, deseasonalize,
                         intraday_pattern, normalize)

PATTERN_MODES = ("window", "global")
DAYS_PER_MONTH = 21
DEFAULT_WINDOW_MONTHS = 48


@dataclass(frozen=True)
class WindowSpec:
    window_len: int
    step: int
    min_intervals: int = 100

    def __post_init__(self):
        if not (int(self.window_len) > int(self.step) > 0):
            raise ConfigError(f"need window_len > step > 0, got {self.window_len}, {self.step}")
        if self.min_intervals < 2:
            raise ConfigError("min_intervals must be at least 2")

    def count(self, series_len: int) -> int:
        if series_len < self.window_len:
            return 0
        return (series_len - self.window_len) // self.step + 1


def months_to_slots(months: float, slots_per_day: int, days_per_month: int = DAYS_PER_MONTH) -> int:
    """Calendar-free month length: slots_per_day × trading days per month."""
    slots = int(round(months * slots_per_day * days_per_month))
    if slots < 1:
        raise ConfigError(f"{months} months is shorter than one slot")
    return slots


@dataclass
class WindowPoint:
    start: int
    end: int  # exclusive index into the input series
    q_by_tau: dict
    lambda_x_by_tau: dict
    boundary: tuple = ()

    @property
    def q_mean(self) -> float | None:
        qs = [q for q in self.q_by_tau.values() if q is not None]
        return float(np.mean(qs)) if qs else None


@dataclass
class ParamTrajectory:
    tau_list: tuple
    points: list = field(default_factory=list)
    window_count: int = 0
    pattern: str = "window"

    @property
    def header(self):
        return ("window_end", "q_mean", *[f"lambda_x_tau{_tau_label(t)}" for t in self.tau_list])

    def rows(self):
        for p in self.points:
            yield (p.end, p.q_mean, *[p.lambda_x_by_tau.get(t) for t in self.tau_list])

    def q_means(self) -> np.ndarray:
        return np.array([np.nan if p.q_mean is None else p.q_mean for p in self.points])


def _tau_label(t) -> str:
    return str(int(t)) if float(t).is_integer() else repr(float(t))


def _window_values(vol: VolatilitySeries, start: int, stop: int, global_des) -> np.ndarray:
    if vol.stage == NORMALIZED:
        return vol.values[start:stop]
    if vol.stage == DESEASONALIZED:
        return normalize(vol.window(start, stop)).values
    if global_des is not None:
        return normalize(global_des.window(start, stop)).values
    w = vol.window(start, stop)
    return normalize(deseasonalize(w, intraday_pattern(w))).values


def fit_window(values: np.ndarray, tau_list, min_intervals: int = 100):
    """Per-τ_Q q-exponential fits in one window; (q, λ_x, boundary flags)."""
    q_by, lam_by, boundary = {}, {}, []
    for tau in tau_list:
        try:
            sample = intervals_for_tau(values, tau)
            fit = fit_qexp(sample, min_n=min_intervals)
        except ExponentialBoundary as exc:
            fit = exc.fit
            boundary.append(tau)
        except (InsufficientData, ConfigError):
            q_by[tau] = lam_by[tau] = None
            continue
        q_by[tau] = fit.params["q"]
        lam_by[tau] = fit.params["lambda_x"]
    return q_by, lam_by, tuple(boundary)


def rolling_fit(vol: VolatilitySeries, tau_list, spec: WindowSpec, pattern: str = "window",
                map_fn=map) -> ParamTrajectory:
    """Fit the q-exponential per τ_Q in each moving window.

    Q is recomputed inside every window. A raw-stage input is deseasonalized
    with a per-window intraday pattern (``pattern="window"``) or once over
    the whole series (``"global"``) and then normalized per window; a
    normalized input is used as is. Windows where no τ_Q yields enough
    intervals are left out; a τ_Q lacking intervals is recorded as None.
    """
    if pattern not in PATTERN_MODES:
        raise ConfigError(f"pattern must be one of {PATTERN_MODES}")
    n = len(vol)
    if n < spec.window_len:
        raise InsufficientData(f"series of {n} slots is shorter than one window ({spec.window_len})")
    tau_list = tuple(tau_list)
    global_des = None
    if vol.stage == RAW and pattern == "global":
        global_des = deseasonalize(vol, intraday_pattern(vol))

    count = spec.count(n)
    starts = [k * spec.step for k in range(count)]

    def one(start):
        stop = start + spec.window_len
        try:
            values = _window_values(vol, start, stop, global_des)
        except DataError:
            return None
        q_by, lam_by, boundary = fit_window(values, tau_list, spec.min_intervals)
        if all(v is None for v in q_by.values()):
            return None
        return WindowPoint(start, stop, q_by, lam_by, boundary)

    points = [p for p in map_fn(one, starts) if p is not None]
    used = "input" if vol.stage != RAW else pattern
    return ParamTrajectory(tau_list, points, count, used)


def slope_vs_tau(values, tau_list) -> tuple[float, float, float]:
    """OLS (slope, intercept, stderr of slope) of a parameter against τ_Q.

    Regressing on y − y[0] makes a constant parameter give a slope of
    exactly zero.
    """
    y = np.asarray(values, dtype=float)
    t = np.asarray(tau_list, dtype=float)
    if y.shape != t.shape:
        raise DataError("values and tau_list differ in length")
    keep = np.isfinite(y)
    y, t = y[keep], t[keep]
    if len(y) < 3:
        raise InsufficientData(f"need at least 3 tau points, got {len(y)}")
    if np.all(t == t[0]):
        raise DataError("tau values are all equal")
    y0 = y[0]
    dy = y - y0
    tc = t - t.mean()
    slope = float(np.dot(tc, dy - dy.mean()) / np.dot(tc, tc))
    intercept = float(y0 + dy.mean() - slope * t.mean())
    resid = dy - dy.mean() - slope * tc
    stderr = float(np.sqrt(np.dot(resid, resid) / (len(y) - 2) / np.dot(tc, tc)))
    return slope, intercept, stderr
