import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sp
from scipy import stats

from volrecur import distributions as dist
from volrecur.errors import DegenerateSample, ExponentialBoundary, FitFailed, InsufficientData
from volrecur.fitting import (FITTERS, DistributionFit, fit_all_and_rank, fit_powerlaw_cutoff,
                              fit_qexp, fit_stretched_exp, fit_weibull2, fit_weibull3, ks_statistic,
                              powerlaw_cutoff_loglik, qexp_loglik, staged_lattice_argmax,
                              stretched_exp_loglik)
from volrecur.intervals import IntervalSample
from volrecur.synthetic import make_rng, sample_family

from oracles import ks_brute, scipy_cdf


def _draw(family, params, n=10_000, seed=0):
    return sample_family(family, params, n, make_rng(seed))


def _loglik_ref(family, params, x):
    if family == "stretched_exp":
        mu = params["mu"]
        lg1, lg2 = sp.gammaln(1 / mu), sp.gammaln(2 / mu)
        return len(x) * (np.log(mu) + lg2 - 2 * lg1) - np.sum((np.exp(lg2 - lg1) * x) ** mu)
    a = -params["gamma"]
    return float(np.sum(stats.gamma.logpdf(x, a, scale=1 / a)))


def test_stretched_exponential_sample():
    fit = fit_stretched_exp(_draw("weibull2", {"zeta": 1.0, "d_x": 1.0}, seed=1))
    assert abs(fit.params["mu"] - 1) <= 0.05


@pytest.mark.parametrize("family,fitter,name,lo,hi", [
    ("stretched_exp", fit_stretched_exp, "mu", 1e-6, 5.0),
    ("powerlaw_cutoff", fit_powerlaw_cutoff, "gamma", -1 + 1e-6, -1e-6),
])
def test_lattice_local_optimality(family, fitter, name, lo, hi):
    x = _draw(family, {name: 0.6 if name == "mu" else -0.4}, 2000, seed=3)
    fit = fitter(x)
    best = _loglik_ref(family, fit.params, x)
    for step in (-1e-5, 1e-5, -1e-6, 1e-6):
        v = fit.params[name] + step
        if lo <= v <= hi:
            assert best >= _loglik_ref(family, {name: v}, x) - 1e-9 * abs(best)


def test_profile_likelihoods_match_reference():
    x = _draw("stretched_exp", {"mu": 0.7}, 300, seed=5)
    mus = np.array([0.3, 0.7, 2.0])
    ref = [_loglik_ref("stretched_exp", {"mu": m}, x) for m in mus]
    np.testing.assert_allclose(stretched_exp_loglik(mus, x), ref, rtol=1e-12)
    gs = np.array([-0.8, -0.5, -0.1])
    ref = [_loglik_ref("powerlaw_cutoff", {"gamma": g}, x) for g in gs]
    np.testing.assert_allclose(powerlaw_cutoff_loglik(gs, x), ref, rtol=1e-12)


def test_powerlaw_cutoff_recovery():
    fit = fit_powerlaw_cutoff(_draw("powerlaw_cutoff", {"gamma": -0.5}, seed=2))
    assert abs(fit.params["gamma"] + 0.5) <= 0.05


def test_stage_maxima_never_decrease():
    x = _draw("stretched_exp", {"mu": 0.5}, 1000, seed=6)
    for fit in (fit_stretched_exp(x), fit_powerlaw_cutoff(x), fit_weibull3(x)):
        assert list(fit.stage_best) == sorted(fit.stage_best)


@given(center=st.integers(0, 10_000_000), width=st.floats(1e3, 1e7))
def test_staged_search_finds_unimodal_peak(center, width):
    f = lambda k: -((k - center) / width) ** 2
    res = staged_lattice_argmax(f, 0, 10_000_000)
    assert res.k == center


def test_qexp_recovery():
    lam = 1 / (3 - 2 * 1.3)
    fit = fit_qexp(_draw("q_exp", {"q": 1.3, "lambda_x": lam}, seed=7))
    assert abs(fit.params["q"] - 1.3) <= 0.05
    assert abs(fit.params["lambda_x"] / lam - 1) <= 0.1


def test_qexp_eight_neighbour_optimality():
    x = _draw("q_exp", {"q": 1.25, "lambda_x": 2.0}, 3000, seed=8)
    fit = fit_qexp(x)
    q, lam = fit.params["q"], fit.params["lambda_x"]
    best = qexp_loglik(q, lam, x)
    for dq in (-1e-5, 0, 1e-5):
        for dl in (-1e-5, 0, 1e-5):
            assert best >= qexp_loglik(q + dq, lam + dl, x)
    assert fit.log_likelihood == pytest.approx(dist.log_likelihood("q_exp", fit.params, x), rel=1e-12)


def test_qexp_exponential_sample_near_boundary():
    x = _draw("weibull2", {"zeta": 1.0, "d_x": 1.0}, seed=9)
    try:
        q = fit_qexp(x).params["q"]
    except ExponentialBoundary as exc:
        assert "exponential_boundary" in exc.fit.diagnostics
        q = exc.fit.params["q"]
    assert q <= 1.05


def test_qexp_lambda_cap_diagnostic():
    x = _draw("q_exp", {"q": 1.5, "lambda_x": 8.0}, 2000, seed=10)
    fit = fit_qexp(x, lambda_max=2.0)
    assert fit.params["lambda_x"] == 2.0
    assert "lambda_x_at_bound" in fit.diagnostics


def test_weibull2_exponential_sample():
    fit = fit_weibull2(_draw("weibull2", {"zeta": 1.0, "d_x": 1.0}, seed=11))
    assert abs(fit.params["zeta"] - 1) <= 0.05
    assert abs(fit.params["d_x"] - 1) <= 0.05


def test_weibull2_matches_scipy_mle():
    x = _draw("weibull2", {"zeta": 0.8, "d_x": 0.9}, 2000, seed=12)
    fit = fit_weibull2(x)
    c, _, scale = stats.weibull_min.fit(x, floc=0)
    assert fit.params["zeta"] == pytest.approx(c, rel=1e-4)
    assert fit.params["d_x"] == pytest.approx(scale, rel=1e-4)


def test_weibull3_on_unshifted_data():
    fit = fit_weibull3(_draw("weibull2", {"zeta": 1.0, "d_x": 1.0}, seed=13))
    assert fit.params["x0"] <= 0.02
    assert fit.params["x0"] < np.min(_draw("weibull2", {"zeta": 1.0, "d_x": 1.0}, seed=13))


@given(seed=st.integers(0, 10_000), zeta=st.floats(0.6, 3.0), x0=st.floats(0.0, 0.5))
def test_weibull3_nests_weibull2(seed, zeta, x0):
    x = _draw("weibull3", {"zeta": zeta, "d_x": 1.0, "x0": x0}, 200, seed)
    assert fit_weibull3(x).log_likelihood >= fit_weibull2(x).log_likelihood - 1e-9


def test_sample_guards():
    with pytest.raises(InsufficientData):
        fit_weibull2(np.arange(1.0, 51.0))
    with pytest.raises(DegenerateSample):
        fit_stretched_exp(np.full(200, 0.5))
    with pytest.raises(DegenerateSample):
        fit_qexp(np.r_[0.0, np.arange(1.0, 200.0)])
    assert fit_weibull2(np.arange(1.0, 51.0), min_n=10).n == 50


def test_interval_sample_input_uses_scaled_values():
    raw = np.ceil(_draw("weibull2", {"zeta": 1.0, "d_x": 1.0}, 500, seed=14) * 20)
    s = IntervalSample(20.0, 1.0, raw.astype(int), np.cumsum(raw).astype(int), int(raw.sum()) + 1)
    fit = fit_weibull2(s)
    assert fit.tau_q == 20.0
    assert fit.params == fit_weibull2(raw / 20).params


def test_ks_single_point():
    assert ks_statistic([1.0], "weibull2", {"zeta": 1.0, "d_x": 1 / np.log(2)}) == pytest.approx(0.5)


def test_ks_perfect_fit():
    n = 400
    u = (np.arange(1, n + 1) - 0.5) / n
    x = -np.log1p(-u)
    assert ks_statistic(x, "weibull2", {"zeta": 1.0, "d_x": 1.0}) <= 0.5 / n + 1e-12


def test_ks_with_ties_matches_brute_force():
    x = np.repeat([0.2, 0.5, 0.5, 1.0, 3.0], 3)
    p = {"q": 1.2, "lambda_x": 1.5}
    ref = ks_brute(x, lambda v: scipy_cdf("q_exp", p, v))
    assert abs(ks_statistic(x, "q_exp", p) - ref) < 1e-12


def test_ranking_on_qexp_sample():
    ranking = fit_all_and_rank(_draw("q_exp", {"q": 1.3, "lambda_x": 2.5}, seed=15))
    assert ranking.best.family.value == "q_exp"
    assert len(ranking) <= 5
    ks = [f.ks for f in ranking]
    assert ks == sorted(ks)


def test_ranking_on_exponential_sample():
    n = 10_000
    ranking = fit_all_and_rank(_draw("weibull2", {"zeta": 1.0, "d_x": 1.0}, n, seed=16))
    assert len(ranking) == 5
    assert all(f.ks <= 2 / np.sqrt(n) for f in ranking)


def test_ranking_records_failures(monkeypatch):
    def broken(*a, **k):
        raise FitFailed("boom")

    monkeypatch.setitem(FITTERS, dist.DistFamily.WEIBULL3, broken)
    ranking = fit_all_and_rank(_draw("q_exp", {"q": 1.3, "lambda_x": 2.5}, 500, seed=17))
    assert len(ranking) == 4
    assert "weibull3" in ranking.failures


def test_fit_json_round_trip():
    fit = fit_weibull2(_draw("weibull2", {"zeta": 1.2, "d_x": 0.7}, 300, seed=18), tau_q=40)
    d = json.loads(json.dumps(fit.to_dict()))
    assert set(d) == {"family", "params", "log_likelihood", "ks", "n", "tau_q"}
    assert set(d["params"]) == {"zeta", "d_x"}
    back = DistributionFit.from_dict(d)
    assert back.params == fit.params and back.family == fit.family
    assert 0 <= fit.ks <= 1 and np.isfinite(fit.log_likelihood)
