"""q in moving windows, and its slope against tau_Q on the whole series."""
import numpy as np

from volrecur.fitting import fit_qexp
from volrecur.errors import ExponentialBoundary
from volrecur.intervals import intervals_for_tau
from volrecur.rolling import WindowSpec, months_to_slots, rolling_fit, slope_vs_tau
from volrecur.synthetic import GeneratorSpec, clustered_prices
from volrecur.volatility import preprocess

prices = clustered_prices(GeneratorSpec("clustered", {}, n=21 * 30, seed=5))
raw = preprocess(prices)["raw"]

spec = WindowSpec(months_to_slots(12, 240), months_to_slots(3, 240))
traj = rolling_fit(raw, (20, 50, 100), spec)
print("windows:", traj.window_count, "pattern:", traj.pattern)
for row in traj.rows():
    print("   ", row)

v = preprocess(prices)["normalized"]
taus = list(range(20, 101, 10))
qs = []
for tau in taus:
    try:
        qs.append(fit_qexp(intervals_for_tau(v, tau)).params["q"])
    except ExponentialBoundary as exc:
        qs.append(exc.fit.params["q"])
print("q by tau_Q:", np.round(qs, 4))
print("slope, intercept, stderr:", slope_vs_tau(qs, taus))
