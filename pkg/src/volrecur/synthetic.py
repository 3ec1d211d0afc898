"""Synthetic event and volatility series with known recurrence statistics.

Randomness comes from numpy's Philox counter-based bit generator keyed by a
single integer seed, so a (spec, seed) pair reproduces the same stream on
every platform. Changing the bit generator or the order of draws is a
breaking change.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist
from .distributions import DistFamily
from .errors import ConfigError, InvalidParams
from .io import PriceSeries
from .volatility import VolatilitySeries, normalize, preprocess

RENEWAL_KINDS = ("qexp", "poisson", "weibull2")
KINDS = RENEWAL_KINDS + ("clustered",)
MAX_SERIES_LEN = 500_000_000


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def sample_qexp_interval(q, lam, u):
    """Inverse survival transform of the q-exponential.

    τ = [(1−u)^((q−1)/(q−2)) − 1] / ((q−1)λ); u = 0 gives τ = 0.
    """
    if not (1 < q < 2 and lam > 0):
        raise InvalidParams(f"q-exponential needs 1 < q < 2 and lam > 0, got q={q}, lam={lam}")
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u >= 1)):
        raise InvalidParams("u must lie in [0, 1)")
    return np.expm1((q - 1.0) / (q - 2.0) * np.log1p(-u)) / ((q - 1.0) * lam)


def _gamma_small_shape(a, size, rng):
    """Ahrens-Dieter GS rejection sampler for Gamma(a, 1) with 0 < a < 1."""
    b = (np.e + a) / np.e
    out = np.empty(0)
    while len(out) < size:
        m = int(1.3 * (size - len(out))) + 16
        p = b * rng.random(m)
        u2 = rng.random(m)
        low = p <= 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(low, p ** (1.0 / a), -np.log((b - p) / a))
            accept = np.where(low, u2 <= np.exp(-x), u2 <= x ** (a - 1.0))
        out = np.concatenate([out, x[accept]])
    return out[:size]


def sample_family(family, params, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw scaled intervals x from one of the candidate families."""
    family = dist.as_family(family)
    p = dist.validate_params(family, params)
    if family is DistFamily.STRETCHED_EXP:
        mu = p["mu"]
        _, log_beta = dist.stretched_constants(mu)
        # y = (βx)^μ is Gamma(1/μ) distributed
        y = rng.standard_gamma(1.0 / mu, size)
        return y ** (1.0 / mu) / np.exp(log_beta)
    if family is DistFamily.POWERLAW_CUTOFF:
        a = -p["gamma"]
        return _gamma_small_shape(a, size, rng) / a
    if family is DistFamily.QEXP:
        return sample_qexp_interval(p["q"], p["lambda_x"], rng.random(size))
    e = -np.log1p(-rng.random(size))
    return p.get("x0", 0.0) + p["d_x"] * e ** (1.0 / p["zeta"])


@dataclass(frozen=True)
class GeneratorSpec:
    """What to generate.

    Renewal kinds use raw slot units: ``qexp`` {q, lam}, ``poisson``
    {mean}, ``weibull2`` {zeta, d}; ``n`` is the number of events.
    ``clustered`` uses {persistence, ratio, slots_per_day, ...} and ``n`` is
    the number of trading days.
    """

    kind: str
    params: dict = field(default_factory=dict)
    n: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown generator kind {self.kind!r}; choose from {KINDS}")
        if int(self.n) < 1:
            raise ConfigError("n must be positive")


def renewal_intervals(spec: GeneratorSpec) -> np.ndarray:
    """Integer intervals ceil(τ) ≥ 1 of a renewal process."""
    rng = make_rng(spec.seed)
    p = spec.params
    n = int(spec.n)
    if spec.kind == "qexp":
        tau = sample_qexp_interval(float(p["q"]), float(p["lam"]), rng.random(n))
    elif spec.kind == "poisson":
        mean = float(p.get("mean", 100.0))
        if not mean > 0:
            raise InvalidParams("mean must be positive")
        tau = -mean * np.log1p(-rng.random(n))
    elif spec.kind == "weibull2":
        tau = sample_family(DistFamily.WEIBULL2, {"zeta": p["zeta"], "d_x": p["d"]}, n, rng)
    else:
        raise ConfigError(f"{spec.kind!r} is not a renewal kind")
    return np.maximum(np.ceil(tau), 1).astype(np.int64)


def renewal_event_series(spec: GeneratorSpec) -> np.ndarray:
    """Boolean event series with events at the cumulative interval sums.

    Slot 0 is a virtual event that is not marked, so every marked event is
    preceded by exactly one generated interval.
    """
    tau = renewal_intervals(spec)
    if tau.sum(dtype=float) > MAX_SERIES_LEN:
        raise ConfigError(f"series of {tau.sum()} slots exceeds the {MAX_SERIES_LEN} budget")
    pos = np.cumsum(tau)
    events = np.zeros(pos[-1] + 1, dtype=bool)
    events[pos] = True
    return events


def events_to_volatility(events: np.ndarray, seed: int = 0, slots_per_day: int = 240) -> VolatilitySeries:
    """Normalized series whose largest values sit exactly on the events."""
    rng = make_rng(seed + 0x5EED)
    noise = rng.random(len(events))
    values = np.where(events, 10.0 + noise, noise)
    idx = np.arange(len(events))
    vol = VolatilitySeries(idx // slots_per_day, idx % slots_per_day, values, "deseasonalized",
                           slots_per_day)
    return normalize(vol)


def _regimes(n, up, down, rng):
    # up: calm -> turbulent, down: turbulent -> calm; start from stationarity
    start = rng.random() < up / (up + down)
    state = np.empty(n, dtype=bool)
    # runs of constant state have geometric lengths; build them directly
    pos, cur = 0, start
    while pos < n:
        p = down if cur else up
        length = rng.geometric(p) if p > 0 else n
        state[pos:pos + length] = cur
        pos += length
        cur = not cur
    return state


def clustered_prices(spec: GeneratorSpec) -> PriceSeries:
    """Two-state multiplicative regime process turned into intraday prices.

    Returns r = base · season(slot) · level · ε with ε standard normal, level
    ``ratio`` in the turbulent regime and 1 in the calm one. Regimes switch
    per slot with probabilities ``switch_up`` / ``switch_down`` (both default
    to 1 − ``persistence``). ``season`` is a U-shaped intraday profile so that
    deseasonalization has something to remove.
    """
    if spec.kind != "clustered":
        raise ConfigError("clustered_prices needs kind='clustered'")
    p = spec.params
    S = int(p.get("slots_per_day", 240))
    persistence = float(p.get("persistence", 0.99))
    up = float(p.get("switch_up", 1.0 - persistence))
    down = float(p.get("switch_down", 1.0 - persistence))
    ratio = float(p.get("ratio", 5.0))
    base = float(p.get("base_vol", 1e-3))
    amplitude = float(p.get("season_amplitude", 1.0))
    if not (0 < up <= 1 and 0 < down <= 1):
        raise ConfigError(f"switch probabilities must lie in (0, 1], got up={up}, down={down}")
    if not ratio > 0 or S < 2:
        raise ConfigError("ratio must be positive and slots_per_day >= 2")
    n_days = int(spec.n)
    n = n_days * S
    rng = make_rng(spec.seed)
    turbulent = _regimes(n, up, down, rng)
    eps = rng.standard_normal(n)
    s = np.arange(S)
    season = 1.0 + amplitude * ((2.0 * s / (S - 1)) - 1.0) ** 2
    level = np.where(turbulent, ratio, 1.0)
    r = base * np.tile(season, n_days) * level * eps
    logp = np.log(100.0) + np.cumsum(r)
    idx = np.arange(n)
    return PriceSeries(idx // S, idx % S, np.exp(logp), S)


def clustered_volatility(spec: GeneratorSpec) -> VolatilitySeries:
    """Normalized volatility of :func:`clustered_prices` (same-day returns only)."""
    return preprocess(clustered_prices(spec))["normalized"]
