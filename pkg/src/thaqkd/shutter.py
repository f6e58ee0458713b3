"""Shutter defence: the probe bounces between shutter and encoder until it escapes.

All times are in units of the shutter period ``t_P`` unless set otherwise.
Each extra round trip costs a factor ``eta_R`` in photon number.
"""

from dataclasses import dataclass, replace

import numpy as np

from .keyrate import secret_key_rate
from .separable import MU_MAX, separable_delta_bound

MOD_SNAP = 1e-12


@dataclass(frozen=True)
class ShutterConfig:
    """Timing, reflectivity and probe settings.

    ``delta`` is the half-width of the timing uncertainty window and ``eps``
    the bit error rate fed to the key rate.
    """

    t_L: float = 0.9
    t_S: float = 0.1
    t_P: float = 1.0
    eta_R: float = 0.5
    N: float = 1e6
    delta: float = 0.01
    R_max: int = 10_000
    eps: float = 0.0

    def __post_init__(self):
        if not 0 < self.t_S < self.t_P:
            raise ValueError(f"need 0 < t_S < t_P, got t_S={self.t_S}, t_P={self.t_P}")
        if not self.t_L > 0:
            raise ValueError(f"travel time must be positive, got {self.t_L}")
        if not 0 < self.eta_R < 1:
            raise ValueError(f"rear reflectivity must lie in (0, 1), got {self.eta_R}")
        if self.N < 0 or self.delta < 0 or not 0 <= self.eps <= 1:
            raise ValueError("need N >= 0, delta >= 0 and eps in [0, 1]")
        if self.R_max < 1:
            raise ValueError(f"R_max must be >= 1, got {self.R_max}")


def _phase(R, t_L, t_P):
    """``R t_L mod t_P`` with values within ``MOD_SNAP`` of either end snapped to 0."""
    x = R * t_L
    r = x - np.floor(x / t_P) * t_P
    if r < MOD_SNAP * t_P or t_P - r < MOD_SNAP * t_P:
        return 0.0
    return r


def reflection_count(cfg):
    """Smallest ``R >= 1`` with ``0 <= R t_L mod t_P <= t_S`` (both bounds inclusive)."""
    for R in range(1, cfg.R_max + 1):
        if _phase(R, cfg.t_L, cfg.t_P) <= cfg.t_S * (1 + MOD_SNAP):
            return R
    raise ArithmeticError(f"no escape within cap: R_max={cfg.R_max} reached at t_L={cfg.t_L}")


def returned_mean_photons(N, eta_R, R):
    """``N eta_R^(R-1)``."""
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    return float(N * eta_R ** (R - 1))


def shutter_key_rate(cfg):
    """Key rate with ``p_succ = 1`` and the separable distinguishability bound.

    Returns ``(R, mu, KeyRateResult)``. The bound is only defined up to
    ``mu = 2``; beyond that the distinguishability is set to 1/2.
    """
    R = reflection_count(cfg)
    mu = returned_mean_photons(cfg.N, cfg.eta_R, R)
    delta = separable_delta_bound(mu) if mu <= MU_MAX else 0.5
    return R, mu, secret_key_rate(1.0, cfg.eps, delta)


def minimizing_convolution(t, values, delta):
    """Worst value of ``values`` within ``[t - delta, t + delta]`` at every sample.

    Windows are truncated at the ends of the sampled range.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.shape != values.shape or t.ndim != 1:
        raise ValueError("t and values must be 1-D arrays of equal length")
    if np.any(np.diff(t) < 0):
        raise ValueError("samples must be sorted by t")
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta}")
    pad = MOD_SNAP * max(1.0, float(np.max(np.abs(t)))) if t.size else 0.0
    lo = np.searchsorted(t, t - delta - pad, side="left")
    hi = np.searchsorted(t, t + delta + pad, side="right")
    return np.array([values[a:b].min() for a, b in zip(lo, hi)])


@dataclass(frozen=True)
class ShutterRow:
    t_L: float
    R: int
    mu: float
    K_raw: float
    K_convolved: float


def travel_time_sweep(cfg, t_grid):
    """Reflection count, returned photons, key rate and its windowed minimum over ``t_grid``.

    ``K_raw`` is the clamped key rate before the timing-uncertainty window is applied.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    rows = [shutter_key_rate(replace(cfg, t_L=float(t))) for t in t_grid]
    K = np.array([r[2].K for r in rows])
    conv = minimizing_convolution(t_grid, K, cfg.delta) if t_grid.size else K
    return [
        ShutterRow(float(t), int(R), float(mu), float(k), float(c))
        for t, (R, mu, _), k, c in zip(t_grid, rows, K, conv)
    ]


def default_grid(n=1000):
    """``n`` evenly spaced travel times in ``(0, 1]`` (units of ``t_P``)."""
    return np.arange(1, n + 1) / n


def best_convolved_rate(cfg, t_grid):
    return max(r.K_convolved for r in travel_time_sweep(cfg, t_grid))


def calibrate_N(cfg, t_grid, N_grid=None, high=(0.01, 0.9), band=(0.02, 0.65, 0.85)):
    """Search a probe size ``N`` that meets two key-rate targets.

    With window ``high[0]`` the best windowed key rate must reach ``high[1]``;
    with window ``band[0]`` it must land in ``[band[1], band[2]]``. Returns
    ``(N, best_high, best_band)`` for the first ``N`` in ``N_grid`` that
    satisfies both, or ``None`` if none does.
    """
    if N_grid is None:
        N_grid = np.geomspace(1e2, 1e8, 61)
    for N in N_grid:
        a = best_convolved_rate(replace(cfg, N=float(N), delta=high[0]), t_grid)
        if a < high[1]:
            continue
        b = best_convolved_rate(replace(cfg, N=float(N), delta=band[0]), t_grid)
        if band[1] <= b <= band[2]:
            return float(N), a, b
    return None
