"""Closed-form q-exponential hazard against the counting estimate."""
import numpy as np

from volrecur.hazard import default_t_grid, empirical_hazard_curve, hazard_qexp
from volrecur.synthetic import GeneratorSpec, renewal_intervals

q, lam = 1.3, 0.05
tau = renewal_intervals(GeneratorSpec("qexp", {"q": q, "lam": lam}, n=100_000, seed=3))
grid = default_t_grid(float(tau.max()), points=15)

for dt in (1, 5, 10):
    emp, n_tail = empirical_hazard_curve(tau, grid, dt)
    print(f"dt={dt}")
    for t, we, wa, nt in zip(grid, emp, hazard_qexp(q, lam, grid, dt), n_tail):
        if not np.isnan(we):
            print(f"    t={t:6.0f}  empirical={we:.4f}  closed form={wa:.4f}  tail={nt}")
