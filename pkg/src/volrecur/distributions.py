"""The five candidate recurrence-interval families in scaled units x = τ/τ_Q.

Parameters are plain dicts keyed by the names in :data:`PARAM_NAMES`. The
stretched exponential and the power law with exponential cutoff are the
unit-mass, unit-mean members of their families, so a single shape parameter
determines the density; their raw-τ constants are recovered with
:func:`implied_constants`.
"""
from __future__ import annotations

from enum import Enum
from typing import Mapping

import numpy as np

from .errors import DataError, InvalidParams
from .special import gammainc_lower, gammainc_upper, log_gamma


class DistFamily(str, Enum):
    STRETCHED_EXP = "stretched_exp"
    POWERLAW_CUTOFF = "powerlaw_cutoff"
    QEXP = "q_exp"
    WEIBULL2 = "weibull2"
    WEIBULL3 = "weibull3"

    def __str__(self):
        return self.value


PARAM_NAMES = {
    DistFamily.STRETCHED_EXP: ("mu",),
    DistFamily.POWERLAW_CUTOFF: ("gamma",),
    DistFamily.QEXP: ("q", "lambda_x"),
    DistFamily.WEIBULL2: ("zeta", "d_x"),
    DistFamily.WEIBULL3: ("zeta", "d_x", "x0"),
}


def as_family(family) -> DistFamily:
    try:
        return DistFamily(family)
    except ValueError:
        raise InvalidParams(f"unknown family {family!r}") from None


def validate_params(family, params: Mapping[str, float]) -> dict:
    family = as_family(family)
    names = PARAM_NAMES[family]
    missing = [k for k in names if k not in params]
    if missing:
        raise InvalidParams(f"{family}: missing parameters {missing}")
    p = {k: float(params[k]) for k in names}
    if family is DistFamily.STRETCHED_EXP:
        ok = p["mu"] > 0
    elif family is DistFamily.POWERLAW_CUTOFF:
        ok = -1 < p["gamma"] < 0
    elif family is DistFamily.QEXP:
        ok = 1 < p["q"] < 2 and p["lambda_x"] > 0
    else:
        ok = p["zeta"] > 0 and p["d_x"] > 0 and p.get("x0", 0.0) >= 0
    if not ok or not all(np.isfinite(list(p.values()))):
        raise InvalidParams(f"{family}: parameters out of range: {p}")
    return p


def stretched_constants(mu):
    """(log A, log β) with f(x) = A exp(−(βx)^μ) of unit mass and unit mean."""
    mu = np.asarray(mu, dtype=float)
    lg1 = log_gamma(1.0 / mu)
    lg2 = log_gamma(2.0 / mu)
    return np.log(mu) + lg2 - 2.0 * lg1, lg2 - lg1


def implied_constants(family, params, tau_q: float) -> dict:
    """Raw-τ constants behind the scaled parameters for a given τ_Q.

    stretched_exp -> a, b; powerlaw_cutoff -> c, k; q_exp -> lambda;
    weibull -> d (and tau0).
    """
    family = as_family(family)
    p = validate_params(family, params)
    if family is DistFamily.STRETCHED_EXP:
        log_A, log_beta = stretched_constants(p["mu"])
        return {"a": float(np.exp(log_A)) / tau_q, "b": float(np.exp(log_beta)) / tau_q}
    if family is DistFamily.POWERLAW_CUTOFF:
        g = p["gamma"]
        k = -g / tau_q
        c = float(np.exp(-g * np.log(k) - log_gamma(-g)))
        return {"c": c, "k": k}
    if family is DistFamily.QEXP:
        return {"lambda": p["lambda_x"] / tau_q}
    out = {"d": p["d_x"] * tau_q}
    if family is DistFamily.WEIBULL3:
        out["tau0"] = p["x0"] * tau_q
    return out


def _support_check(family, p, x, strict):
    x = np.asarray(x, dtype=float)
    lo = p.get("x0", 0.0)
    bad = (x <= lo) if (strict and family is DistFamily.WEIBULL3) else (x < lo)
    if np.any(bad) or np.any(np.isnan(x)):
        raise DataError(f"{family}: x outside the support (x0={lo})")
    return x


def logpdf(family, params, x) -> np.ndarray:
    family = as_family(family)
    p = validate_params(family, params)
    x = _support_check(family, p, x, strict=True)
    with np.errstate(divide="ignore"):
        if family is DistFamily.STRETCHED_EXP:
            mu = p["mu"]
            log_A, log_beta = stretched_constants(mu)
            return log_A - np.exp(mu * (log_beta + np.log(x)))
        if family is DistFamily.POWERLAW_CUTOFF:
            a = -p["gamma"]
            return a * np.log(a) - log_gamma(a) + (a - 1.0) * np.log(x) - a * x
        if family is DistFamily.QEXP:
            q, lam = p["q"], p["lambda_x"]
            return np.log(2.0 - q) + np.log(lam) - np.log1p((q - 1.0) * lam * x) / (q - 1.0)
        zeta, d = p["zeta"], p["d_x"]
        y = (x - p.get("x0", 0.0)) / d
        return np.log(zeta / d) + (zeta - 1.0) * np.log(y) - y ** zeta


def pdf(family, params, x) -> np.ndarray:
    """Density f(x) of scaled intervals."""
    return np.exp(logpdf(family, params, x))


def sf(family, params, x) -> np.ndarray:
    """Survival function 1 − F(x); equals 1 at and below the support start."""
    family = as_family(family)
    p = validate_params(family, params)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DataError(f"{family}: x must be >= 0")
    if family is DistFamily.STRETCHED_EXP:
        mu = p["mu"]
        _, log_beta = stretched_constants(mu)
        with np.errstate(divide="ignore"):
            y = np.exp(mu * (log_beta + np.log(x)))
        return gammainc_upper(np.full_like(y, 1.0 / mu), y)
    if family is DistFamily.POWERLAW_CUTOFF:
        a = -p["gamma"]
        return gammainc_upper(np.full_like(x, a), a * x)
    if family is DistFamily.QEXP:
        q, lam = p["q"], p["lambda_x"]
        return np.exp((q - 2.0) / (q - 1.0) * np.log1p((q - 1.0) * lam * x))
    y = np.maximum(x - p.get("x0", 0.0), 0.0) / p["d_x"]
    return np.exp(-(y ** p["zeta"]))


def cdf(family, params, x) -> np.ndarray:
    """Distribution function F(x); zero at x = 0 (or x0 for weibull3)."""
    family = as_family(family)
    p = validate_params(family, params)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DataError(f"{family}: x must be >= 0")
    if family is DistFamily.STRETCHED_EXP:
        mu = p["mu"]
        _, log_beta = stretched_constants(mu)
        with np.errstate(divide="ignore"):
            y = np.exp(mu * (log_beta + np.log(x)))
        return gammainc_lower(np.full_like(y, 1.0 / mu), y)
    if family is DistFamily.POWERLAW_CUTOFF:
        a = -p["gamma"]
        return gammainc_lower(np.full_like(x, a), a * x)
    if family is DistFamily.QEXP:
        q, lam = p["q"], p["lambda_x"]
        return -np.expm1((q - 2.0) / (q - 1.0) * np.log1p((q - 1.0) * lam * x))
    y = np.maximum(x - p.get("x0", 0.0), 0.0) / p["d_x"]
    return -np.expm1(-(y ** p["zeta"]))


def log_likelihood(family, params, x) -> float:
    return float(np.sum(logpdf(family, params, x)))


def mean(family, params) -> float:
    """Mean of the scaled distribution (inf for q_exp with q >= 1.5)."""
    family = as_family(family)
    p = validate_params(family, params)
    if family in (DistFamily.STRETCHED_EXP, DistFamily.POWERLAW_CUTOFF):
        return 1.0
    if family is DistFamily.QEXP:
        q = p["q"]
        return 1.0 / ((3.0 - 2.0 * q) * p["lambda_x"]) if q < 1.5 else float("inf")
    return p.get("x0", 0.0) + p["d_x"] * float(np.exp(log_gamma(1.0 + 1.0 / p["zeta"])))
