"""Gaussian states of bosonic modes and the operations needed for the attack circuit.

Conventions
-----------
Quadratures are ``x = a + a^dag`` and ``p = -i(a - a^dag)``, so the vacuum has
covariance equal to the identity. Vectors and matrices are stored in ``xxpp``
order: ``[x_1, ..., x_n, p_1, ..., p_n]``.

All operations return new states; nothing is mutated in place.
"""

from dataclasses import dataclass

import numpy as np

PHYSICAL_TOL = 1e-9
SYMMETRY_TOL = 1e-12
MAX_CONDITION = 1e12
PURE_SNAP = 1e-9


class NumericalError(ArithmeticError):
    """Raised when a computation would return garbage (ill-conditioned input)."""


def symplectic_form(n):
    """Return the ``2n x 2n`` symplectic form ``[[0, I], [-I, 0]]`` (xxpp order)."""
    if n < 1:
        raise ValueError(f"number of modes must be positive, got {n}")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and covariance matrix of an ``n``-mode Gaussian state.

    Both are in xxpp order with vacuum covariance equal to the identity.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size % 2 or mean.size == 0:
            raise ValueError(f"mean vector must have even positive length, got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        scale = max(1.0, np.max(np.abs(cov)))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        cov = (cov + cov.T) / 2
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self):
        return self.mean.size // 2

    def mode_indices(self, mode):
        """Return the (x, p) positions of ``mode`` in the xxpp vectors."""
        if not 0 <= mode < self.n_modes:
            raise IndexError(f"mode {mode} out of range for {self.n_modes}-mode state")
        return mode, mode + self.n_modes

    def min_physical_eigenvalue(self):
        """Smallest eigenvalue of ``cov + i Omega`` (non-negative for physical states)."""
        omega = symplectic_form(self.n_modes)
        return float(np.linalg.eigvalsh(self.cov + 1j * omega)[0])

    def is_physical(self, tol=PHYSICAL_TOL):
        return self.min_physical_eigenvalue() >= -tol

    def to_text(self):
        """Plain-text debug form: mean, then row-major cov, 17 significant digits."""
        fmt = lambda v: " ".join(f"{x:.17g}" for x in v)  # noqa: E731
        lines = [fmt(self.mean)]
        lines.extend(fmt(row) for row in self.cov)
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text):
        rows = [np.array(line.split(), dtype=float) for line in text.strip().splitlines()]
        return cls(rows[0], np.vstack(rows[1:]))

    def __eq__(self, other):
        if not isinstance(other, GaussianState):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(self.cov, other.cov)

    def __repr__(self):
        return f"GaussianState(n_modes={self.n_modes}, mean={self.mean.tolist()})"


def vacuum(n):
    if n < 1:
        raise ValueError(f"number of modes must be positive, got {n}")
    return GaussianState(np.zeros(2 * n), np.eye(2 * n))


def coherent(alpha):
    """Single-mode coherent state with amplitude ``alpha``."""
    return displace(vacuum(1), 0, alpha)


def thermal(nbar):
    """Single-mode thermal state with ``nbar`` mean photons."""
    return add_thermal_additive(vacuum(1), 0, nbar)


def _apply_symplectic(s, S):
    return GaussianState(S @ s.mean, S @ s.cov @ S.T)


def displace(s, mode, alpha):
    ix, ip = s.mode_indices(mode)
    mean = s.mean.copy()
    mean[ix] += 2 * np.real(alpha)
    mean[ip] += 2 * np.imag(alpha)
    return GaussianState(mean, s.cov)


def phase_rotate(s, mode, theta):
    """Apply ``exp(i theta a^dag a)`` to ``mode``; maps ``alpha -> alpha e^{i theta}``."""
    ix, ip = s.mode_indices(mode)
    S = np.eye(2 * s.n_modes)
    c, sn = np.cos(theta), np.sin(theta)
    S[ix, ix], S[ix, ip] = c, -sn
    S[ip, ix], S[ip, ip] = sn, c
    return _apply_symplectic(s, S)


def two_mode_squeeze(s, modes, xi):
    """Two-mode squeezing with real parameter ``xi`` on the pair ``modes``."""
    i, j = modes
    if i == j:
        raise ValueError("two-mode squeezing needs two distinct modes")
    xi_, pi_ = s.mode_indices(i)
    xj, pj = s.mode_indices(j)
    ch, sh = np.cosh(xi), np.sinh(xi)
    S = np.eye(2 * s.n_modes)
    S[xi_, xi_], S[xi_, xj] = ch, sh
    S[xj, xi_], S[xj, xj] = sh, ch
    S[pi_, pi_], S[pi_, pj] = ch, -sh
    S[pj, pi_], S[pj, pj] = -sh, ch
    return _apply_symplectic(s, S)


def pure_loss(s, mode, eta):
    """Beam splitter of transmissivity ``eta`` against a vacuum environment."""
    if not 0 <= eta <= 1:
        raise ValueError(f"transmissivity must lie in [0, 1], got {eta}")
    idx = list(s.mode_indices(mode))
    scale = np.ones(2 * s.n_modes)
    scale[idx] = np.sqrt(eta)
    cov = s.cov * np.outer(scale, scale)
    cov[idx, idx] += 1 - eta
    return GaussianState(s.mean * scale, cov)


def add_thermal_additive(s, mode, mu_T):
    """Classical additive noise: ``cov += 2 mu_T`` on the mode block, mean untouched."""
    if mu_T < 0:
        raise ValueError(f"thermal photon number must be non-negative, got {mu_T}")
    idx = list(s.mode_indices(mode))
    cov = s.cov.copy()
    cov[idx, idx] += 2 * mu_T
    return GaussianState(s.mean, cov)


def add_thermal_tms(s, mode, mu_T):
    """Thermal noise from a two-mode squeezer against vacuum, ancilla discarded.

    Unlike :func:`add_thermal_additive` this amplifies the mean by
    ``cosh(arcsinh(sqrt(mu_T)))``.
    """
    if mu_T < 0:
        raise ValueError(f"thermal photon number must be non-negative, got {mu_T}")
    s.mode_indices(mode)
    n = s.n_modes
    extended = _append_vacuum(s)
    squeezed = two_mode_squeeze(extended, (mode, n), np.arcsinh(np.sqrt(mu_T)))
    return partial_trace(squeezed, range(n))


def _append_vacuum(s):
    n = s.n_modes
    order = list(range(n)) + list(range(n + 1, 2 * n + 1))  # old x's, old p's in new layout
    mean = np.zeros(2 * n + 2)
    cov = np.eye(2 * n + 2)
    mean[order] = s.mean
    cov[np.ix_(order, order)] = s.cov
    return GaussianState(mean, cov)


def tensor(*states):
    """Product state of the given states, modes in argument order."""
    xs, ps, blocks = [], [], []
    offset = 0
    total = sum(st.n_modes for st in states)
    for st in states:
        n = st.n_modes
        xs.append(np.arange(offset, offset + n))
        ps.append(np.arange(total + offset, total + offset + n))
        offset += n
    mean = np.zeros(2 * total)
    cov = np.zeros((2 * total, 2 * total))
    for st, x, p in zip(states, xs, ps):
        idx = np.concatenate([x, p])
        mean[idx] = st.mean
        cov[np.ix_(idx, idx)] = st.cov
    return GaussianState(mean, cov)


def partial_trace(s, keep):
    """Reduce to the modes in ``keep`` (re-indexed in sorted order)."""
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("must keep at least one mode")
    for m in keep:
        s.mode_indices(m)
    idx = keep + [m + s.n_modes for m in keep]
    return GaussianState(s.mean[idx], s.cov[np.ix_(idx, idx)])


def mean_photons(s, mode):
    ix, ip = s.mode_indices(mode)
    block = s.cov[ix, ix] + s.cov[ip, ip]
    return float((block + s.mean[ix] ** 2 + s.mean[ip] ** 2) / 4 - 0.5)


def _check_pair(s1, s2, check_physical):
    if s1.n_modes != s2.n_modes:
        raise ValueError(f"mode count mismatch: {s1.n_modes} vs {s2.n_modes}")
    if check_physical:
        for s in (s1, s2):
            lam = s.min_physical_eigenvalue()
            if lam < -PHYSICAL_TOL:
                raise ValueError(f"state is not physical (min eigenvalue of cov + i*Omega = {lam:.3e})")


def log_fidelity(s1, s2, check_physical=True):
    """Natural log of the Uhlmann fidelity ``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))``.

    Uses the closed form for arbitrary Gaussian states. Internally the moments
    are converted to the convention with vacuum covariance ``I/2`` (covariance
    halved, mean divided by ``sqrt(2)``) before the formula is applied.
    Working in log space keeps strong-signal cases away from underflow.
    """
    _check_pair(s1, s2, check_physical)
    n = s1.n_modes
    V1, V2 = s1.cov / 2, s2.cov / 2
    du = (s1.mean - s2.mean) / np.sqrt(2)
    total = V1 + V2
    cond = np.linalg.cond(total)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise NumericalError(f"sum of covariances is ill-conditioned (cond = {cond:.3e})")
    inv = np.linalg.inv(total)
    omega = symplectic_form(n)
    W = -2j * omega.T @ inv @ (omega / 4 + V2 @ omega @ V1) @ omega
    w = np.linalg.eigvals(W)
    w = np.sort(w[np.argsort(-w.real)[:n]].real)
    w = np.where((w < 1) & (w > 1 - PURE_SNAP), 1.0, w)
    w = np.where((w > 1) & (w < 1 + PURE_SNAP), 1.0, w)
    if np.any(w < 1):
        raise NumericalError(f"auxiliary eigenvalues below 1: {w}")
    sign, logdet = np.linalg.slogdet(total)
    if sign <= 0:
        raise NumericalError("sum of covariances is not positive definite")
    log_f = 0.5 * np.sum(np.arccosh(w)) - 0.25 * logdet - 0.25 * du @ inv @ du
    return float(min(log_f, 0.0))


def fidelity(s1, s2, check_physical=True):
    """Uhlmann fidelity between two Gaussian states, in [0, 1]."""
    return float(np.exp(log_fidelity(s1, s2, check_physical)))
