import numpy as np

from thaqkd import keyrate

# Adding thermal noise hides the phase from Eve but also costs Bob clicks and
# errors. Fibre: attenuation length 25 km, dephasing length 5e4 km.
mu_D = 0.1
Ls = np.arange(0.0, 40.5, 2.5)
base = keyrate.distance_sweep(mu_D, Ls, L_Q=5e4, optimize=False)
opt = keyrate.distance_sweep(mu_D, Ls, L_Q=5e4)

print(" L_km   K_no_noise   K_best   mu_T_best")
for b, o in zip(base, opt):
    print(f"{b.L_km:5.1f}  {b.K:10.6f}  {o.K:8.6f}  {o.mu_T_opt:8.4f}")

# Noise only pays off at zero distance, where it creates no bit errors. Once
# the fibre loses photons, thermal clicks turn into errors, and the effective
# error penalty grows like the square root of that error rate.
k_base = lambda L: keyrate.thermal_key_rate(mu_D, 0.0, keyrate.ChannelModel(L, 25, 5e4)).K  # noqa: E731
print("secure range without noise:", keyrate.secure_range(base, k_base), "km")

# Bucket and photon-number-resolving detectors give the same error rate.
print(keyrate.bucket_stats(1.0, 0.5, 0.1))
print(keyrate.pnrd_stats(1.0, 0.5, 0.1))
