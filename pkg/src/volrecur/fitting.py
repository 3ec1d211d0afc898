"""Maximum-likelihood fits of the candidate families and KS ranking.

All searches run on integer lattices so that a staged coarse-to-fine search
and an exhaustive scan evaluate bit-identical parameter values:

* stretched_exp: μ = k·1e-6 on (0, 5], strides 1e-2 → 1e-4 → 1e-6.
* powerlaw_cutoff: γ = k·1e-6 on (−1, 0), same strides.
* q_exp: profile likelihood over θ = (q−1)λ_x on a log10 lattice, then a
  hill climb on the (q, λ_x) lattice of step 1e-5.
* weibull2: ζ from the profile score equation, d_x in closed form.
* weibull3: x0 = u·min(x) with u on a staged lattice down to 1e-6, weibull2
  profile inside.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from . import distributions as dist
from .distributions import DistFamily
from .errors import (
    DegenerateSample,
    ExponentialBoundary,
    FitFailed,
    InsufficientData,
    NumericalError,
    VolrecurError,
)
from .intervals import IntervalSample
from .special import log_gamma

MIN_SAMPLE = 100
LATTICE = 1_000_000  # finest lattice resolution 1e-6
STAGE_STRIDES = (10_000, 100, 1)
QEXP_STEP = 1e-5
LAMBDA_MAX = 1e3

_CHUNK_ELEMS = 2_000_000


@dataclass
class DistributionFit:
    family: DistFamily
    params: dict
    log_likelihood: float
    ks: float
    n: int
    tau_q: float
    diagnostics: tuple = ()
    stage_best: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        out = {
            "family": self.family.value,
            "params": {k: float(v) for k, v in self.params.items()},
            "log_likelihood": float(self.log_likelihood),
            "ks": float(self.ks),
            "n": int(self.n),
            "tau_q": float(self.tau_q),
        }
        if self.diagnostics:
            out["diagnostics"] = list(self.diagnostics)
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "DistributionFit":
        return cls(DistFamily(d["family"]), dict(d["params"]), float(d["log_likelihood"]),
                   float(d["ks"]), int(d["n"]), float(d["tau_q"]), tuple(d.get("diagnostics", ())))


@dataclass
class LatticeSearch:
    k: int
    value: float
    stage_best: list
    evaluations: int


def staged_lattice_argmax(objective: Callable[[np.ndarray], np.ndarray], lo: int, hi: int,
                          strides: Sequence[int] = STAGE_STRIDES, bracket: int = 2) -> LatticeSearch:
    """Coarse-to-fine maximization of ``objective`` over integers in [lo, hi].

    Each stage scans multiples of its stride inside the current bracket (plus
    the bracket ends), then narrows the bracket to ±``bracket`` strides around
    the best point. Because every stride divides the previous one, the best
    point of a stage is always revisited by the next, so stage maxima never
    decrease. Ties go to the smallest k.
    """
    a, b = int(lo), int(hi)
    stage_best = []
    evaluations = 0
    best_k, best = a, -np.inf
    for stride in strides:
        start = -(-a // stride) * stride
        ks = np.unique(np.concatenate([np.arange(start, b + 1, stride, dtype=np.int64), [a, b]]))
        vals = np.asarray(objective(ks), dtype=float)
        evaluations += len(ks)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        i = int(np.argmax(vals))
        best_k, best = int(ks[i]), float(vals[i])
        stage_best.append(best)
        a = max(lo, best_k - bracket * stride)
        b = min(hi, best_k + bracket * stride)
    return LatticeSearch(best_k, best, stage_best, evaluations)


def _prepare(sample, tau_q, min_n):
    if isinstance(sample, IntervalSample):
        x = sample.scaled
        tau_q = sample.tau_q if tau_q is None else tau_q
    else:
        x = np.asarray(sample, dtype=float)
    tau_q = 1.0 if tau_q is None else float(tau_q)
    if len(x) < min_n:
        raise InsufficientData(f"sample of {len(x)} intervals; need at least {min_n}")
    if np.any(~(x > 0)) or not np.all(np.isfinite(x)):
        raise DegenerateSample("intervals must be positive and finite")
    if np.all(x == x[0]):
        raise DegenerateSample("all intervals are equal")
    return x, tau_q


def _finish(family, params, x, tau_q, diagnostics=(), stage_best=()):
    ll = dist.log_likelihood(family, params, x)
    if not np.isfinite(ll):
        raise FitFailed(f"{family}: non-finite log-likelihood at {params}")
    return DistributionFit(family, params, ll, ks_statistic(x, family, params), len(x), tau_q,
                           tuple(diagnostics), tuple(stage_best))


# stretched exponential -------------------------------------------------------

def stretched_exp_loglik(mu, x) -> np.ndarray:
    """Profile log-likelihood in μ with a, b eliminated by the unit-mass and
    unit-mean constraints; vectorized over ``mu``."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    logx = np.log(np.asarray(x, dtype=float))
    log_A, log_beta = stretched_constants_arr(mu)
    out = np.empty(len(mu))
    step = max(1, _CHUNK_ELEMS // len(logx))
    for s in range(0, len(mu), step):
        m = mu[s:s + step, None]
        with np.errstate(over="ignore"):
            tail = np.exp(m * (log_beta[s:s + step, None] + logx[None, :])).sum(axis=1)
        out[s:s + step] = len(logx) * log_A[s:s + step] - tail
    return out


def stretched_constants_arr(mu):
    log_A, log_beta = dist.stretched_constants(mu)
    return np.atleast_1d(log_A), np.atleast_1d(log_beta)


def fit_stretched_exp(sample, tau_q: float | None = None, min_n: int = MIN_SAMPLE) -> DistributionFit:
    """MLE of μ ∈ (0, 5] by staged lattice search at final step 1e-6."""
    x, tau_q = _prepare(sample, tau_q, min_n)
    res = staged_lattice_argmax(lambda k: stretched_exp_loglik(k / LATTICE, x), 1, 5 * LATTICE)
    mu = res.k / LATTICE
    diag = ("mu_at_bound",) if res.k in (1, 5 * LATTICE) else ()
    return _finish(DistFamily.STRETCHED_EXP, {"mu": mu}, x, tau_q, diag, res.stage_best)


# power law with exponential cutoff ------------------------------------------

def powerlaw_cutoff_loglik(gamma, x) -> np.ndarray:
    """Profile log-likelihood in γ with c, k eliminated; vectorized over γ.

    Only Σ ln x and Σ x enter, so this is cheap for any lattice size.
    """
    a = -np.atleast_1d(np.asarray(gamma, dtype=float))
    x = np.asarray(x, dtype=float)
    n, slog, s = len(x), np.log(x).sum(), x.sum()
    return n * (a * np.log(a) - log_gamma(a)) + (a - 1.0) * slog - a * s


def fit_powerlaw_cutoff(sample, tau_q: float | None = None, min_n: int = MIN_SAMPLE) -> DistributionFit:
    """MLE of γ ∈ (−1, 0) by staged lattice search at final step 1e-6."""
    x, tau_q = _prepare(sample, tau_q, min_n)
    lo, hi = -LATTICE + 1, -1
    res = staged_lattice_argmax(lambda k: powerlaw_cutoff_loglik(k / LATTICE, x), lo, hi)
    diag = ("gamma_at_bound",) if res.k in (lo, hi) else ()
    return _finish(DistFamily.POWERLAW_CUTOFF, {"gamma": res.k / LATTICE}, x, tau_q, diag,
                   res.stage_best)


# q-exponential ---------------------------------------------------------------

def qexp_loglik(q, lam, x) -> np.ndarray:
    """Log-likelihood of the q-exponential, broadcasting over (q, lam)."""
    q = np.asarray(q, dtype=float)
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float)
    qq, ll = np.broadcast_arrays(q, lam)
    flat_q, flat_l = qq.ravel(), ll.ravel()
    out = np.empty(flat_q.shape)
    step = max(1, _CHUNK_ELEMS // len(x))
    for s in range(0, len(flat_q), step):
        qm = flat_q[s:s + step, None]
        lm = flat_l[s:s + step, None]
        g = np.log1p((qm - 1.0) * lm * x[None, :]).sum(axis=1)
        out[s:s + step] = len(x) * (np.log(2.0 - flat_q[s:s + step]) + np.log(flat_l[s:s + step])) \
            - g / (flat_q[s:s + step] - 1.0)
    return out.reshape(qq.shape)


def _qexp_profile(theta, x):
    # with θ = (q−1)λ fixed the optimal q is 1 + g/(1+g), g = mean log1p(θx);
    # the profile log-likelihood per point is then ln θ − ln g − 1 − g
    theta = np.atleast_1d(theta)
    g = np.empty(len(theta))
    step = max(1, _CHUNK_ELEMS // len(x))
    for s in range(0, len(theta), step):
        g[s:s + step] = np.log1p(theta[s:s + step, None] * x[None, :]).mean(axis=1)
    return g, len(x) * (np.log(theta) - np.log(g) - 1.0 - g)


def _lattice_climb(f, i, j, i_bounds, j_bounds, max_steps=100_000):
    """Move to the best of the 8 neighbours until the centre wins."""
    offs = np.array([(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)])
    for _ in range(max_steps):
        ii = np.clip(i + offs[:, 0], *i_bounds)
        jj = np.clip(j + offs[:, 1], *j_bounds)
        vals = f(ii, jj)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        centre = vals[4]
        best = int(np.argmax(vals))
        if vals[best] <= centre:
            return i, j, centre
        i, j = int(ii[best]), int(jj[best])
    raise FitFailed("lattice climb did not converge")


def fit_qexp(sample, tau_q: float | None = None, min_n: int = MIN_SAMPLE,
             lambda_max: float = LAMBDA_MAX) -> DistributionFit:
    """Joint MLE of (q, λ_x) over q ∈ (1, 2), λ_x ∈ (0, lambda_max].

    A staged log-lattice over θ = (q−1)λ_x with the exact profile in q locates
    the optimum; a hill climb on the (q, λ_x) lattice of step 1e-5 then makes
    it a lattice local maximum. An optimum at the smallest lattice q raises
    :class:`ExponentialBoundary` carrying the boundary fit.
    """
    x, tau_q = _prepare(sample, tau_q, min_n)
    res = staged_lattice_argmax(lambda k: _qexp_profile(10.0 ** (k / LATTICE), x)[1],
                                -8 * LATTICE, 6 * LATTICE)
    theta = 10.0 ** (res.k / LATTICE)
    g = _qexp_profile(theta, x)[0][0]
    q0 = 1.0 + g / (1.0 + g)
    lam0 = theta / (q0 - 1.0)

    scale = round(1.0 / QEXP_STEP)
    i_bounds = (scale + 1, 2 * scale - 1)
    j_bounds = (1, int(round(lambda_max * scale)))
    i0 = int(np.clip(round(q0 * scale), *i_bounds))
    j0 = int(np.clip(round(lam0 * scale), *j_bounds))
    i, j, best = _lattice_climb(lambda ii, jj: qexp_loglik(ii / scale, jj / scale, x),
                                i0, j0, i_bounds, j_bounds)
    diagnostics = []
    if j == j_bounds[1]:
        diagnostics.append("lambda_x_at_bound")
    fit = _finish(DistFamily.QEXP, {"q": i / scale, "lambda_x": j / scale}, x, tau_q,
                  diagnostics, (*res.stage_best, best))
    if i == i_bounds[0]:
        fit.diagnostics = (*fit.diagnostics, "exponential_boundary")
        raise ExponentialBoundary(f"q-exponential optimum at the q -> 1 boundary (n={len(x)})", fit)
    return fit


# Weibull ---------------------------------------------------------------------

def _weibull_profile(y):
    """Exact profile MLE of a two-parameter Weibull on positive ``y``.

    Returns (zeta, d, loglik). ζ solves the profile score equation
    1/ζ + mean(ln y) − Σ y^ζ ln y / Σ y^ζ = 0, which is decreasing in ζ.
    """
    ly = np.log(y)
    mean_ly = ly.mean()
    n = len(y)

    def score(log_zeta):
        z = np.exp(log_zeta)
        e = z * ly
        w = np.exp(e - e.max())
        return 1.0 / z + mean_ly - np.dot(w, ly) / w.sum()

    lo, hi = np.log(1e-4), np.log(1e4)
    s_lo, s_hi = score(lo), score(hi)
    if not (s_lo > 0 > s_hi):
        raise FitFailed("weibull shape outside [1e-4, 1e4]")
    z = float(np.exp(brentq(score, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)))
    e = z * ly
    emax = e.max()
    log_mean_pow = emax + np.log(np.exp(e - emax).sum()) - np.log(n)
    log_d = log_mean_pow / z
    ll = n * np.log(z) - n * z * log_d + (z - 1.0) * ly.sum() - n
    return z, float(np.exp(log_d)), float(ll)


def fit_weibull2(sample, tau_q: float | None = None, min_n: int = MIN_SAMPLE) -> DistributionFit:
    x, tau_q = _prepare(sample, tau_q, min_n)
    zeta, d, _ = _weibull_profile(x)
    return _finish(DistFamily.WEIBULL2, {"zeta": zeta, "d_x": d}, x, tau_q)


X0_STRIDES = (10_000, 1_000, 100, 10, 1)
X0_MAX_FRACTION = 1.0 - 1e-9


def fit_weibull3(sample, tau_q: float | None = None, min_n: int = MIN_SAMPLE) -> DistributionFit:
    """Three-parameter Weibull: staged lattice over the location x0.

    x0 = u·min(x) with u = k·1e-6 capped at 1 − 1e-9; u = 0 is the two
    parameter fit, so the result never has lower likelihood than
    :func:`fit_weibull2`.
    """
    x, tau_q = _prepare(sample, tau_q, min_n)
    xmin = x.min()
    cache = {}

    def profile(k):
        if k not in cache:
            x0 = min(k / LATTICE, X0_MAX_FRACTION) * xmin
            try:
                cache[k] = (x0, *_weibull_profile(x - x0))
            except FitFailed:
                cache[k] = (x0, np.nan, np.nan, -np.inf)
        return cache[k]

    res = staged_lattice_argmax(lambda ks: np.array([profile(int(k))[3] for k in ks]),
                                0, LATTICE, X0_STRIDES)
    x0, zeta, d, _ = profile(res.k)
    if not np.isfinite(zeta):
        raise FitFailed("weibull3 profile failed everywhere")
    diag = ("x0_at_bound",) if res.k == LATTICE else ()
    return _finish(DistFamily.WEIBULL3, {"zeta": zeta, "d_x": d, "x0": float(x0)}, x, tau_q, diag,
                   res.stage_best)


# goodness of fit and ranking -------------------------------------------------

def ks_statistic(sample, family, params) -> float:
    """Two-sided KS distance using both one-sided limits of the empirical CDF.

    max over sample points of |F_n(x⁻) − F(x)| and |F_n(x) − F(x)|; ties in
    the sample are handled through the left and right step heights.
    """
    x = np.sort(np.asarray(sample.scaled if isinstance(sample, IntervalSample) else sample,
                          dtype=float))
    n = len(x)
    if n == 0:
        raise InsufficientData("empty sample")
    F = dist.cdf(family, params, x)
    left = np.searchsorted(x, x, side="left") / n
    right = np.searchsorted(x, x, side="right") / n
    return float(min(1.0, max(np.max(np.abs(left - F)), np.max(np.abs(right - F)))))


FITTERS = {
    DistFamily.STRETCHED_EXP: fit_stretched_exp,
    DistFamily.POWERLAW_CUTOFF: fit_powerlaw_cutoff,
    DistFamily.QEXP: fit_qexp,
    DistFamily.WEIBULL2: fit_weibull2,
    DistFamily.WEIBULL3: fit_weibull3,
}


def fit_family(family, sample, tau_q: float | None = None, min_n: int = MIN_SAMPLE) -> DistributionFit:
    return FITTERS[dist.as_family(family)](sample, tau_q=tau_q, min_n=min_n)


class FitRanking(list):
    """Fits sorted by KS ascending; ``failures`` maps family -> error text."""

    def __init__(self, fits=(), failures=None):
        super().__init__(fits)
        self.failures = dict(failures or {})

    @property
    def best(self) -> DistributionFit:
        return self[0]


def fit_all_and_rank(sample, tau_q: float | None = None, min_n: int = MIN_SAMPLE,
                     families: Sequence = tuple(DistFamily), map_fn=map) -> FitRanking:
    """Fit every family and sort by KS statistic.

    A family that fails is recorded in ``failures`` and the rest continue. A
    q-exponential fit stuck at the exponential boundary is kept (flagged in
    its diagnostics), since the exponential is a legitimate limit of the
    family. ``map_fn`` lets callers run the fits on an executor.
    """
    x, tau_q = _prepare(sample, tau_q, min_n)

    def attempt(family):
        try:
            return fit_family(family, x, tau_q, min_n)
        except ExponentialBoundary as exc:
            return exc.fit
        except (VolrecurError, FloatingPointError, ValueError) as exc:
            return exc

    families = [dist.as_family(f) for f in families]
    fits, failures = [], {}
    for family, result in zip(families, map_fn(attempt, families)):
        if isinstance(result, DistributionFit):
            fits.append(result)
        else:
            failures[family.value] = f"{type(result).__name__}: {result}"
    if not fits:
        raise NumericalError(f"all families failed: {failures}")
    fits.sort(key=lambda f: (f.ks, f.family.value))
    return FitRanking(fits, failures)
