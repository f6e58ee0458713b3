"""BB84 key rates with a side channel, Bob's detectors under thermal noise, and
the optimisation of Alice's thermal defence.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .attack import distinguishability, simplified_fidelity

KEY_RATE_FLOOR = 1e-9


def binary_entropy(x):
    """``H2(x)`` in bits, with ``H2(0) = H2(1) = 0``. Accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)) or np.any(np.isnan(x)):
        raise ValueError(f"binary entropy needs x in [0, 1], got {x}")
    inner = (x > 0) & (x < 1)
    safe = np.where(inner, x, 0.5)
    h = np.where(inner, -safe * np.log2(safe) - (1 - safe) * np.log2(1 - safe), 0.0)
    return float(h) if h.ndim == 0 else h


def effective_error(eps, delta):
    """Error rate inflated by a side channel of distinguishability ``delta``."""
    if not 0 <= eps <= 1:
        raise ValueError(f"error rate must lie in [0, 1], got {eps}")
    if not 0 <= delta <= 0.5:
        raise ValueError(f"distinguishability must lie in [0, 1/2], got {delta}")
    val = (
        eps
        + 4 * delta * (1 - delta) * (1 - 2 * eps)
        + 4 * (1 - 2 * delta) * np.sqrt(delta * (1 - delta) * eps * (1 - eps))
    )
    return float(min(max(val, 0.0), 1.0))


@dataclass(frozen=True)
class ChannelModel:
    """Fibre of length ``L`` with attenuation length ``L0`` and dephasing length ``L_Q`` (km)."""

    L: float
    L0: float = 25.0
    L_Q: float = 1e3

    def __post_init__(self):
        if self.L < 0 or self.L0 <= 0 or self.L_Q <= 0:
            raise ValueError(f"invalid channel: L={self.L}, L0={self.L0}, L_Q={self.L_Q}")

    @property
    def T(self):
        return float(np.exp(-self.L / self.L0))

    @property
    def Q(self):
        return float(0.5 * (1 - np.exp(-self.L / self.L_Q)))


@dataclass(frozen=True)
class DetectionStats:
    p_succ: float
    eps: float
    detector_kind: str


def _check_detector_inputs(mu_T, T, Q):
    if mu_T < 0:
        raise ValueError(f"mu_T must be non-negative, got {mu_T}")
    if not 0 < T <= 1:
        raise ValueError(f"transmissivity T must lie in (0, 1], got {T}")
    if not 0 <= Q <= 1:
        raise ValueError(f"bit-flip probability Q must lie in [0, 1], got {Q}")


def bucket_stats(mu_T, T, Q):
    """Click probability and error rate for two bucket detectors."""
    _check_detector_inputs(mu_T, T, Q)
    p_succ = 2 * T * (2 + 2 * mu_T - T * mu_T) / (2 + T * mu_T) ** 2
    eps = (2 * Q + mu_T * (1 - T + Q * T)) / (2 + mu_T * (2 - T))
    return DetectionStats(float(p_succ), float(eps), "bucket")


def bucket_stats_from_components(mu_T, T, Q):
    """Same as :func:`bucket_stats`, assembled from the signal and noise-click terms.

    Each detector sees geometric noise with mean ``T mu_T / 2``.
    """
    _check_detector_inputs(mu_T, T, Q)
    m = T * mu_T / 2
    p_right, p_wrong, p_lost = T * (1 - Q), T * Q, 1 - T
    none_other = 1 / (m + 1)  # sum_c q(c, 0)
    noise_only = m / (m + 1) ** 2  # sum_{c>=1} q(c, 0)
    p_succ = p_right * none_other + p_wrong * none_other + 2 * p_lost * noise_only
    wrong = p_wrong * none_other + p_lost * noise_only
    return DetectionStats(float(p_succ), float(wrong / p_succ), "bucket")


def pnrd_stats(mu_T, T, Q):
    """Photon-number-resolving detectors: a click needs exactly one photon."""
    _check_detector_inputs(mu_T, T, Q)
    m = T * mu_T / 2
    q00 = 1 / (m + 1) ** 2
    q10 = m / (m + 1) ** 3
    p_succ = T * q00 + 2 * (1 - T) * q10  # right and wrong signal clicks together carry T
    wrong = T * Q * q00 + (1 - T) * q10
    return DetectionStats(float(p_succ), float(wrong / p_succ), "pnrd")


@dataclass(frozen=True)
class KeyRateResult:
    K: float
    K_raw: float
    eps: float
    eps_tilde: float
    delta_used: float
    p_succ: float
    saturated: bool = False


def secret_key_rate(p_succ, eps, delta):
    """Key rate ``p_succ [1 - H2(eps) - H2(eps~(eps, delta / p_succ))]``, clamped at 0.

    When ``delta / p_succ`` exceeds 1/2 it is capped there and the result is
    flagged ``saturated``. An effective error of 1/2 or more costs a full bit of
    privacy amplification, so the rate never recovers as ``delta`` grows.
    """
    if not 0 < p_succ <= 1:
        raise ValueError(f"p_succ must lie in (0, 1], got {p_succ}")
    if not 0 <= eps <= 1:
        raise ValueError(f"error rate must lie in [0, 1], got {eps}")
    if not 0 <= delta <= 0.5:
        raise ValueError(f"distinguishability must lie in [0, 1/2], got {delta}")
    d = delta / p_succ
    saturated = d >= 0.5
    d = min(d, 0.5)
    et = effective_error(eps, d)
    pa = binary_entropy(et) if et <= 0.5 else 1.0
    raw = p_succ * (1 - binary_entropy(eps) - pa)
    return KeyRateResult(max(raw, 0.0), raw, eps, et, d, p_succ, saturated)


def vanilla_key_rate(R, eps):
    """BB84 without side channel: ``R [1 - 2 H2(eps)]``, clamped at 0."""
    if R < 0:
        raise ValueError(f"raw rate must be non-negative, got {R}")
    return max(R * (1 - 2 * binary_entropy(eps)), 0.0)


def thermal_key_rate(mu_D, mu_T, channel, detector="bucket"):
    """Key rate for a coherent probe returning ``mu_D`` photons, with ``mu_T`` noise."""
    stats = {"bucket": bucket_stats, "pnrd": pnrd_stats}[detector](mu_T, channel.T, channel.Q)
    delta = distinguishability(simplified_fidelity(mu_D, mu_T))
    return secret_key_rate(stats.p_succ, stats.eps, delta)


def optimize_thermal(mu_D, channel, mu_range=(1e-4, 1e3), n_grid=128, detector="bucket"):
    """Thermal photon number that maximises the key rate.

    Log-spaced grid over ``mu_range`` plus ``mu_T = 0``, then bounded refinement
    (in ``log mu_T``) around the best grid point. Ties go to the smaller
    ``mu_T``. The result is never worse than adding no noise.
    """
    lo, hi = mu_range
    if n_grid < 1 or not 0 < lo <= hi:
        raise ValueError(f"empty search range {mu_range}")
    grid = np.concatenate([[0.0], np.geomspace(lo, hi, n_grid)])

    def rate(mu):
        return thermal_key_rate(mu_D, mu, channel, detector)

    results = [rate(mu) for mu in grid]
    clamped = np.array([r.K for r in results])
    best = int(np.argmax(clamped))  # first maximum, so an all-zero curve gives mu_T = 0
    mu_star, res_star = float(grid[best]), results[best]
    if clamped[best] > 0 and best >= 1:
        a = np.log(grid[max(best - 1, 1)])
        b = np.log(grid[min(best + 1, n_grid)])
        if b > a:
            opt = minimize_scalar(lambda t: -rate(np.exp(t)).K_raw, bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-9})
            cand = rate(float(np.exp(opt.x)))
            if cand.K_raw > res_star.K_raw:
                mu_star, res_star = float(np.exp(opt.x)), cand
    return mu_star, res_star


@dataclass(frozen=True)
class SweepRow:
    L_km: float
    K: float
    K_raw: float
    eps: float
    eps_tilde: float
    p_succ: float
    mu_T_opt: float


def distance_sweep(mu_D, L_list, L0=25.0, L_Q=1e3, optimize=True, mu_T=0.0, **opt_kwargs):
    """Key rate at each distance, either at fixed ``mu_T`` or optimised over it."""
    rows = []
    for L in L_list:
        ch = ChannelModel(float(L), L0, L_Q)
        if optimize:
            mu, res = optimize_thermal(mu_D, ch, **opt_kwargs)
        else:
            mu, res = mu_T, thermal_key_rate(mu_D, mu_T, ch)
        rows.append(SweepRow(float(L), res.K, res.K_raw, res.eps, res.eps_tilde, res.p_succ, mu))
    return rows


def secure_range(rows, evaluate=None, threshold=KEY_RATE_FLOOR, tol=1e-6):
    """Largest distance with ``K > threshold``.

    With ``evaluate(L) -> K`` the crossing between the last secure row and the
    next row is located by bisection; otherwise the last secure row is returned.
    """
    Ls = [r.L_km for r in rows]
    good = [i for i, r in enumerate(rows) if r.K > threshold]
    if not good:
        raise ValueError("no secure range: key rate is zero at every sweep point")
    last = good[-1]
    if evaluate is None or last == len(rows) - 1:
        return Ls[last]
    lo, hi = Ls[last], Ls[last + 1]
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if evaluate(mid) > threshold:
            lo = mid
        else:
            hi = mid
    return lo
