"""From prices to normalized volatility on a simulated clustered market."""
import numpy as np

from volrecur.synthetic import GeneratorSpec, clustered_prices
from volrecur.volatility import preprocess

prices = clustered_prices(GeneratorSpec("clustered", {"slots_per_day": 240}, n=60, seed=1))
stages = preprocess(prices)

# the intraday pattern is U-shaped by construction; slot 0 has no same-day return
pattern = stages["pattern"].mean
print("pattern at slot 0:", pattern[0])
print("pattern after open, midday, close:", pattern[1], pattern[120], pattern[-1])

v = stages["normalized"].values
print("normalized: n =", len(v), "std =", v.std())  # unit std by construction

# the deseasonalized series has a flat pattern
des = stages["deseasonalized"]
flat = np.array([des.values[des.slot == s].mean() for s in (1, 120, 239)])
print("deseasonalized slot means:", flat)
