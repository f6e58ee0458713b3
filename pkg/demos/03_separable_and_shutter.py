import numpy as np

from thaqkd import separable, shutter

# If Eve may use any separable state, the best Alice can say depends only on
# the mean number of photons mu that come back.
for mu in (0.01, 0.1, 0.5, 1.0):
    print(f"mu={mu:4}  bound={separable.separable_delta_bound(mu):.6f}  "
          f"coherent={separable.lucamarini_delta(mu):.6f}  "
          f"explicit worst case={separable.constructive_separable_delta(mu):.6f}")

# The bound rests on at least e^-mu of the light returning with two photons or fewer.
checks = separable.survival_monte_carlo(200, seed=1)
print("survival bound holds on", sum(c.holds for c in checks), "of", len(checks), "random states")

# A shutter that is open a tenth of the time traps the probe for R round trips.
cfg = shutter.ShutterConfig(N=1.6e4)
grid = shutter.default_grid()
rows = shutter.travel_time_sweep(cfg, grid)
best = max(rows, key=lambda r: r.K_convolved)
print(f"best guaranteed key rate {best.K_convolved:.4f} at t_L = {best.t_L:.3f} t_P (R = {best.R})")
Rs = np.array([r.R for r in rows])
print("largest reflection count on the grid:", Rs.max())
