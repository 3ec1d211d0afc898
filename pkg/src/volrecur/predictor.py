"""Threshold alarms on the hazard probability and their ROC evaluation.

At slot i the alarm is on when W(Δt | t_i) ≥ Q_p, where t_i is the number of
slots since the latest event at or before i. The alarm is scored against
whether any event occurs in slots (i, i + Δt]; the last Δt slots cannot be
scored.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, ExponentialBoundary, UndefinedRate
from .fitting import DistributionFit, fit_qexp
from .hazard import hazard_qexp
from .intervals import extract_intervals, threshold_for_mean_interval
from .volatility import VolatilitySeries

WARMUP_POLICIES = ("elapsed", "skip")


@dataclass(frozen=True)
class AlarmConfig:
    q_p: float = 0.5
    delta_t: int = 1
    warmup: str = "elapsed"

    def __post_init__(self):
        if not 0.0 <= self.q_p <= 1.0:
            raise ConfigError(f"Q_p must lie in [0, 1], got {self.q_p}")
        if int(self.delta_t) != self.delta_t or self.delta_t < 1:
            raise ConfigError(f"delta_t must be a positive integer, got {self.delta_t}")
        if self.warmup not in WARMUP_POLICIES:
            raise ConfigError(f"warmup must be one of {WARMUP_POLICIES}")


@dataclass(frozen=True)
class ConfusionCounts:
    o11: int  # hit
    o00: int  # correct rejection
    o01: int  # miss
    o10: int  # false alarm

    @property
    def total(self) -> int:
        return self.o11 + self.o00 + self.o01 + self.o10


@dataclass
class HazardSeries:
    w: np.ndarray
    elapsed: np.ndarray
    warmup: np.ndarray  # True before the first event


def elapsed_since_event(events: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Slots since the latest event at or before each slot.

    Before the first event the count runs from the start of the series and
    the slot is flagged as warm-up.
    """
    events = np.asarray(events, dtype=bool)
    idx = np.arange(len(events))
    last = np.maximum.accumulate(np.where(events, idx, -1))
    warm = last < 0
    return np.where(warm, idx, idx - last), warm


def hazard_series(events, q: float, lam: float, config: AlarmConfig = AlarmConfig()) -> HazardSeries:
    """Per-slot W(Δt | t) from raw-unit q-exponential parameters.

    With ``warmup="skip"`` the slots before the first event get NaN.
    """
    events = np.asarray(events, dtype=bool)
    if not events.any():
        raise DataError("event series contains no events")
    t, warm = elapsed_since_event(events)
    w = hazard_qexp(q, lam, t, config.delta_t)
    if config.warmup == "skip":
        w = np.where(warm, np.nan, w)
    return HazardSeries(w, t, warm)


def generate_alarms(w, q_p: float) -> np.ndarray:
    """alarm[i] = W[i] ≥ Q_p (NaN never alarms)."""
    if not 0.0 <= q_p <= 1.0:
        raise ConfigError(f"Q_p must lie in [0, 1], got {q_p}")
    w = np.asarray(w, dtype=float)
    with np.errstate(invalid="ignore"):
        return w >= q_p


def event_ahead(events, delta_t: int = 1) -> np.ndarray:
    """target[i] = any event in (i, i + Δt], for the n − Δt scorable slots."""
    events = np.asarray(events, dtype=bool)
    n = len(events)
    if delta_t < 1 or n <= delta_t:
        raise DataError(f"series of {n} slots is too short for delta_t={delta_t}")
    c = np.concatenate([[0], np.cumsum(events)])
    i = np.arange(n - delta_t)
    return c[i + delta_t + 1] - c[i + 1] > 0


def _scorable(w_or_alarms, events, delta_t, mask):
    n = len(events)
    if len(w_or_alarms) != n:
        raise DataError(f"length mismatch: {len(w_or_alarms)} vs {n}")
    keep = np.ones(n - delta_t, dtype=bool)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if len(mask) != n:
            raise DataError("mask length mismatch")
        keep &= mask[: n - delta_t]
    return keep


def score(alarms, events, delta_t: int = 1, mask=None) -> ConfusionCounts:
    """Confusion counts over scorable slots (optionally restricted by ``mask``)."""
    alarms = np.asarray(alarms, dtype=bool)
    events = np.asarray(events, dtype=bool)
    keep = _scorable(alarms, events, delta_t, mask)
    y = event_ahead(events, delta_t)[keep]
    a = alarms[: len(events) - delta_t][keep]
    return ConfusionCounts(
        o11=int(np.count_nonzero(a & y)),
        o00=int(np.count_nonzero(~a & ~y)),
        o01=int(np.count_nonzero(~a & y)),
        o10=int(np.count_nonzero(a & ~y)),
    )


def rates(counts: ConfusionCounts) -> tuple[float | None, float | None]:
    """(D, A) = (O11/(O01+O11), O10/(O00+O10)); None where a denominator is 0."""
    pos = counts.o01 + counts.o11
    neg = counts.o00 + counts.o10
    d = counts.o11 / pos if pos else None
    a = counts.o10 / neg if neg else None
    return d, a


@dataclass
class RocResult:
    q_p: np.ndarray
    a: np.ndarray
    d: np.ndarray
    o11: np.ndarray
    o00: np.ndarray
    o01: np.ndarray
    o10: np.ndarray
    auc: float
    meta: dict = field(default_factory=dict)

    def counts(self, i: int) -> ConfusionCounts:
        return ConfusionCounts(int(self.o11[i]), int(self.o00[i]), int(self.o01[i]), int(self.o10[i]))

    def rows(self):
        return zip(self.q_p.tolist(), self.a.tolist(), self.d.tolist())

    header = ("q_p", "a", "d")


def roc_curve(w, events, q_p_grid=None, delta_t: int = 1, mask=None) -> RocResult:
    """ROC points (Q_p, A, D) for every alarm threshold in ``q_p_grid``.

    The default grid is every distinct W on scorable slots plus 0 and 1,
    which traces the exact empirical curve. AUC is the trapezoid area over
    points ordered by (A, D).
    """
    w = np.asarray(w, dtype=float)
    events = np.asarray(events, dtype=bool)
    keep = _scorable(w, events, delta_t, mask)
    y = event_ahead(events, delta_t)
    ws = w[: len(events) - delta_t]
    keep &= ~np.isnan(ws)
    ws, y = ws[keep], y[keep]
    n_pos = int(np.count_nonzero(y))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedRate(f"scorable slots have {n_pos} events and {n_neg} non-events")

    if q_p_grid is None:
        grid = np.unique(np.concatenate([ws, [0.0, 1.0]]))
    else:
        grid = np.unique(np.asarray(q_p_grid, dtype=float))
        if grid.size == 0 or grid[0] != 0.0 or grid[-1] != 1.0:
            raise ConfigError("Q_p grid must contain 0 and 1 and nothing outside [0, 1]")
    order = np.argsort(ws, kind="stable")
    w_sorted = ws[order]
    pos_before = np.concatenate([[0], np.cumsum(y[order])])
    first_on = np.searchsorted(w_sorted, grid, side="left")  # alarms: sorted index >= first_on
    o11 = n_pos - pos_before[first_on]
    n_on = len(w_sorted) - first_on
    o10 = n_on - o11
    o01 = n_pos - o11
    o00 = n_neg - o10
    d = o11 / n_pos
    a = o10 / n_neg
    by_a = np.lexsort((d, a))
    auc = float(np.trapezoid(d[by_a], a[by_a]))
    return RocResult(grid, a, d, o11, o00, o01, o10, auc,
                     {"delta_t": int(delta_t), "n_scored": int(len(y)), "n_events": n_pos})


def d_at_false_alarm(roc: RocResult, a_star: float = 0.1) -> float:
    """Hit rate at false-alarm rate ``a_star`` by linear interpolation in A.

    An exact A match returns the largest D at that A.
    """
    order = np.lexsort((roc.d, roc.a))
    a, d = roc.a[order], roc.d[order]
    if not a[0] <= a_star <= a[-1]:
        raise DataError(f"A*={a_star} outside the ROC range [{a[0]}, {a[-1]}]")
    lo = int(np.searchsorted(a, a_star, side="right")) - 1
    if a[lo] == a_star:
        return float(d[lo])
    hi = lo + 1
    frac = (a_star - a[lo]) / (a[hi] - a[lo])
    return float(d[lo] + frac * (d[hi] - d[lo]))


@dataclass
class Prediction:
    roc: RocResult
    fit: DistributionFit
    threshold: float
    tau_q: float
    mode: str
    split_index: int
    hazard: HazardSeries
    events: np.ndarray

    @property
    def q(self) -> float:
        return self.fit.params["q"]

    @property
    def lam(self) -> float:
        return self.fit.params["lambda_x"] / self.tau_q

    def summary(self, a_star: float = 0.1) -> dict:
        try:
            d_star = d_at_false_alarm(self.roc, a_star)
        except DataError:
            d_star = None
        return {
            "auc": self.roc.auc,
            "d_at_a": {str(a_star): d_star},
            "mode": self.mode,
            "split_index": self.split_index,
            "tau_q": self.tau_q,
            "threshold": self.threshold,
            "fit": self.fit.to_dict(),
            "n_scored": self.roc.meta["n_scored"],
            "n_events_scored": self.roc.meta["n_events"],
        }


def predict(v, tau_q: float = 100.0, delta_t: int = 1, split: float = 0.7,
            in_sample: bool = False, q_p_grid=None, warmup: str = "elapsed",
            min_n: int = 100) -> Prediction:
    """Fit, hazard and ROC in one go.

    Out of sample (default) the threshold Q and the q-exponential are fitted
    on the first ``split`` fraction and alarms are scored on the rest, with
    elapsed times carried over from the fitting part. ``in_sample`` fits and
    scores on the whole series.
    """
    x = v.values if isinstance(v, VolatilitySeries) else np.asarray(v, dtype=float)
    n = len(x)
    if in_sample:
        cut, mode = n, "in_sample"
    else:
        if not 0.0 < split < 1.0:
            raise ConfigError(f"split must lie in (0, 1), got {split}")
        cut, mode = int(round(split * n)), "out_of_sample"
    fit_part = x[:cut]
    threshold = threshold_for_mean_interval(fit_part, tau_q)
    sample = extract_intervals(fit_part, threshold, tau_q)
    try:
        fit = fit_qexp(sample, min_n=min_n)
    except ExponentialBoundary as exc:
        fit = exc.fit
    events = x > threshold
    config = AlarmConfig(0.5, delta_t, warmup)
    hz = hazard_series(events, fit.params["q"], fit.params["lambda_x"] / tau_q, config)
    mask = None
    if not in_sample:
        mask = np.zeros(n, dtype=bool)
        mask[cut:] = True
    roc = roc_curve(hz.w, events, q_p_grid, delta_t, mask)
    return Prediction(roc, fit, threshold, float(tau_q), mode, 0 if in_sample else cut, hz, events)
