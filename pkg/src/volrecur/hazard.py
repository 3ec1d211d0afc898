"""Hazard probability W(Δt | t) of the next exceedance.

W is the probability that the next event arrives within Δt given that t
slots have passed since the last one, W = 1 − S(t + Δt) / S(t). Times here
are raw slots; family parameters are in scaled units and are converted with
``tau_q``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import distributions as dist
from .distributions import DistFamily
from .errors import DataError, InsufficientTail, InvalidParams, NumericalError
from .intervals import IntervalSample

MIN_TAIL = 20


@dataclass(frozen=True)
class HazardQuery:
    t: float
    delta_t: float

    def __post_init__(self):
        if not (self.t >= 0 and self.delta_t > 0):
            raise InvalidParams(f"need t >= 0 and delta_t > 0, got t={self.t}, delta_t={self.delta_t}")


@dataclass
class HazardCurve:
    """Hazard over a grid of elapsed times for one horizon.

    ``empirical`` is NaN where fewer than the minimum number of intervals
    exceed t; ``n_tail`` always holds that count.
    """

    delta_t: float
    t: np.ndarray
    analytic: np.ndarray
    empirical: np.ndarray
    n_tail: np.ndarray

    def rows(self):
        for t, wa, we, nt in zip(self.t, self.analytic, self.empirical, self.n_tail):
            yield float(t), float(wa), (None if np.isnan(we) else float(we)), int(nt)

    header = ("t", "W_analytic", "W_empirical", "n_tail")


def _check_qexp(q, lam):
    if not (1 < q < 2 and lam > 0):
        raise InvalidParams(f"need 1 < q < 2 and lam > 0, got q={q}, lam={lam}")


def survival_qexp(q, lam, t):
    """S(t) = [1 + (q−1)λt]^(1 − 1/(q−1)) for the raw-τ q-exponential."""
    _check_qexp(q, lam)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParams("t must be >= 0")
    return np.exp((q - 2.0) / (q - 1.0) * np.log1p((q - 1.0) * lam * t))


def hazard_qexp(q, lam, t, delta_t=1.0):
    """Closed-form q-exponential hazard, vectorized over ``t`` and ``delta_t``.

    Evaluated as 1 − S(t+Δt)/S(t) through log1p/expm1, which stays accurate
    when W is tiny; Δt = 0 gives 0. ``t`` may also be a :class:`HazardQuery`.
    """
    _check_qexp(q, lam)
    if isinstance(t, HazardQuery):
        t, delta_t = t.t, t.delta_t
    t = np.asarray(t, dtype=float)
    delta_t = np.asarray(delta_t, dtype=float)
    if np.any(t < 0) or np.any(delta_t < 0):
        raise InvalidParams("t and delta_t must be >= 0")
    ratio = (q - 1.0) * lam * delta_t / (1.0 + (q - 1.0) * lam * t)
    return -np.expm1((q - 2.0) / (q - 1.0) * np.log1p(ratio))


def hazard_qexp_printed(q, lam, t, delta_t=1.0):
    """The same hazard written as 1 − [1 + (q−1)λΔt / (1 + (q−1)λt)]^(1 − 1/(q−1))."""
    t = np.asarray(t, dtype=float)
    return 1.0 - (1.0 + (q - 1.0) * lam * delta_t / (1.0 + (q - 1.0) * lam * t)) ** (1.0 - 1.0 / (q - 1.0))


def hazard_numeric(family, params, tau_q: float, query: HazardQuery,
                   closed_survival: bool = True, rtol: float = 1e-10) -> float:
    """Hazard of any fitted family as a ratio of density integrals.

    The numerator ∫_t^{t+Δt} p is always adaptive quadrature; the
    denominator ∫_t^∞ p uses the family's survival function unless
    ``closed_survival`` is False, in which case it is integrated as well.
    """
    family = dist.as_family(family)
    p = dist.validate_params(family, params)
    lo = query.t / tau_q
    hi = (query.t + query.delta_t) / tau_q
    x0 = p.get("x0", 0.0)

    def f(x):
        return float(dist.pdf(family, p, x)) if x > x0 else 0.0

    def quad(a, b):
        a = max(a, x0)
        if b <= a:
            return 0.0
        points = None
        if np.isfinite(b):
            # help quad with the density's scale where it matters
            inner = [v for v in (x0 + 1e-3, 1.0) if a < v < b]
            points = inner or None
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=500, points=points)
        return val

    num = quad(lo, hi)
    if closed_survival:
        den = float(dist.sf(family, p, lo))
    else:
        den = quad(lo, np.inf)
    if not den > 1e-300:
        raise NumericalError(f"survival at t={query.t} is {den}; too deep in the tail")
    return float(min(max(num / den, 0.0), 1.0))


def hazard_empirical(sample, query: HazardQuery, min_count: int = MIN_TAIL) -> tuple[float, int]:
    """Counting estimate #{t < τ ≤ t+Δt} / #{τ > t} and its denominator."""
    tau = np.asarray(sample.raw if isinstance(sample, IntervalSample) else sample, dtype=float)
    tail = int(np.count_nonzero(tau > query.t))
    if tail < min_count:
        raise InsufficientTail(f"only {tail} intervals exceed t={query.t}; need {min_count}")
    hit = int(np.count_nonzero((tau > query.t) & (tau <= query.t + query.delta_t)))
    return hit / tail, tail


def empirical_hazard_curve(tau, t_grid, delta_t: float, min_count: int = MIN_TAIL):
    """Vectorized :func:`hazard_empirical` over a grid; NaN where the tail is thin."""
    s = np.sort(np.asarray(tau, dtype=float))
    t_grid = np.asarray(t_grid, dtype=float)
    above_t = len(s) - np.searchsorted(s, t_grid, side="right")
    above_end = len(s) - np.searchsorted(s, t_grid + delta_t, side="right")
    with np.errstate(invalid="ignore", divide="ignore"):
        w = (above_t - above_end) / above_t
    w = np.where(above_t >= min_count, w, np.nan)
    return w, above_t


def default_t_grid(t_max: float, points: int = 41) -> np.ndarray:
    """0 plus log-spaced integer elapsed times up to ``t_max``."""
    if t_max < 1:
        return np.array([0.0])
    grid = np.unique(np.round(np.logspace(0.0, np.log10(t_max), points)))
    return np.concatenate([[0.0], grid])


def hazard_curve(sample: IntervalSample, q: float, lambda_x: float, delta_t: float,
                 t_grid=None, min_count: int = MIN_TAIL) -> HazardCurve:
    """Analytic q-exponential hazard next to the empirical one for a sample."""
    if delta_t <= 0:
        raise DataError("delta_t must be positive")
    if t_grid is None:
        t_grid = default_t_grid(float(np.max(sample.raw)))
    t_grid = np.asarray(t_grid, dtype=float)
    lam = lambda_x / sample.tau_q
    analytic = hazard_qexp(q, lam, t_grid, delta_t)
    emp, n_tail = empirical_hazard_curve(sample.raw, t_grid, delta_t, min_count)
    return HazardCurve(float(delta_t), t_grid, analytic, emp, n_tail)


def qexp_family_params(q: float, lam: float, tau_q: float) -> dict:
    """Scaled q_exp parameters from raw (q, λ)."""
    return {"q": q, "lambda_x": lam * tau_q}

