"""Truncated photon-number-basis density matrices.

This is the brute-force reference for every Gaussian closed form in the
package, and the carrier for the Kraus-operator loss channel. It is meant for
one or two modes at cutoffs of a few dozen photons; nothing here is sparse or
fast.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, expm
from scipy.special import gammaln

DEFAULT_CUTOFF = 30
DEFAULT_CUTOFF_TWO_MODE = 20
HERMITIAN_TOL = 1e-10
EIG_CLIP = 1e-8
SUPPORT_TOL = 1e-15
# extra levels used when exponentiating generators, truncated afterwards
_PAD = 15


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    """Density matrix on ``n_modes`` modes, each truncated at ``cutoff`` photons.

    ``leakage`` accumulates the trace lost to truncation before renormalisation.
    Two-mode index order is ``|m0, m1> -> m0 * (cutoff + 1) + m1``.
    """

    rho: np.ndarray
    cutoff: int
    n_modes: int = 1
    leakage: float = 0.0

    def __post_init__(self):
        if self.n_modes not in (1, 2):
            raise ValueError("only one- and two-mode density matrices are supported")
        dim = (self.cutoff + 1) ** self.n_modes
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(rho))):
            raise ValueError("density matrix is not Hermitian")
        object.__setattr__(self, "rho", (rho + rho.conj().T) / 2)

    @property
    def dim(self):
        return (self.cutoff + 1) ** self.n_modes

    def trace(self):
        return float(np.real(np.trace(self.rho)))

    def normalized(self):
        """Renormalise to unit trace, adding the missing weight to ``leakage``."""
        tr = self.trace()
        if tr <= 0:
            raise ValueError("density matrix has non-positive trace")
        return _derived(self, self.rho / tr, self.leakage + (1 - tr))

    def reduced(self, mode):
        """Partial trace of a two-mode matrix down to ``mode``."""
        if self.n_modes == 1:
            if mode != 0:
                raise IndexError(mode)
            return self
        d = self.cutoff + 1
        r = self.rho.reshape(d, d, d, d)
        if mode == 0:
            red = np.einsum("ijkj->ik", r)
        elif mode == 1:
            red = np.einsum("jijk->ik", r)
        else:
            raise IndexError(mode)
        return FockDensityMatrix(red, self.cutoff, 1, self.leakage)

    def to_text(self):
        """Plain-text debug form: real then imaginary parts, row-major, 17 digits."""
        lines = [f"{self.n_modes} {self.cutoff}"]
        for part in (self.rho.real, self.rho.imag):
            lines.extend(" ".join(f"{x:.17g}" for x in row) for row in part)
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text):
        lines = text.strip().splitlines()
        n_modes, cutoff = (int(v) for v in lines[0].split())
        data = np.array([line.split() for line in lines[1:]], dtype=float)
        half = data.shape[0] // 2
        return cls(data[:half] + 1j * data[half:], cutoff, n_modes)


def _derived(state, rho, leakage=None):
    """Copy of ``state`` with a new matrix, skipping validation.

    Only for results of operations that preserve Hermiticity by construction.
    """
    out = object.__new__(FockDensityMatrix)
    for name, value in (("rho", rho), ("cutoff", state.cutoff), ("n_modes", state.n_modes),
                        ("leakage", state.leakage if leakage is None else leakage)):
        object.__setattr__(out, name, value)
    return out


def _annihilation(d):
    return np.diag(np.sqrt(np.arange(1, d)), 1)


def _sandwich(rho, left, right, mode, n_modes, d):
    """Return ``(L x I) rho (R x I)^dag`` with the single-mode ops acting on ``mode``."""
    if n_modes == 1:
        return left @ rho @ right.conj().T
    r = rho.reshape(d, d, d, d)
    if mode == 0:
        r = np.tensordot(left, r, axes=(1, 0))
        r = np.tensordot(r, right.conj(), axes=(2, 1)).transpose(0, 1, 3, 2)
    else:
        r = np.tensordot(left, r, axes=(1, 1)).transpose(1, 0, 2, 3)
        r = np.tensordot(r, right.conj(), axes=(3, 1))
    return r.reshape(d * d, d * d)


def fock_state(k, cutoff=DEFAULT_CUTOFF):
    if not 0 <= k <= cutoff:
        raise ValueError(f"photon number {k} outside [0, {cutoff}]")
    rho = np.zeros((cutoff + 1, cutoff + 1))
    rho[k, k] = 1.0
    return FockDensityMatrix(rho, cutoff)


def vacuum_fock(cutoff=DEFAULT_CUTOFF, n_modes=1):
    d = (cutoff + 1) ** n_modes
    rho = np.zeros((d, d))
    rho[0, 0] = 1.0
    return FockDensityMatrix(rho, cutoff, n_modes)


def coherent_fock(alpha, cutoff=DEFAULT_CUTOFF):
    """Truncated, renormalised ``|alpha><alpha|``."""
    if abs(alpha) ** 2 > cutoff / 4:
        raise ValueError(f"|alpha|^2 = {abs(alpha) ** 2:.3g} exceeds cutoff/4 = {cutoff / 4}")
    n = np.arange(cutoff + 1)
    if alpha == 0:
        psi = (n == 0).astype(complex)
    else:
        log_mag = -abs(alpha) ** 2 / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
        psi = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    return FockDensityMatrix(np.outer(psi, psi.conj()), cutoff).normalized()


def thermal_fock(nbar, cutoff=DEFAULT_CUTOFF):
    """Geometric photon distribution with mean ``nbar``, truncated and renormalised."""
    if nbar < 0:
        raise ValueError("mean photon number must be non-negative")
    n = np.arange(cutoff + 1)
    p = (nbar / (1 + nbar)) ** n / (1 + nbar)
    return FockDensityMatrix(np.diag(p), cutoff).normalized()


def diagonal_state(probs):
    """Mixture of Fock states with the given photon-number distribution."""
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0):
        raise ValueError("probabilities must be non-negative")
    return FockDensityMatrix(np.diag(probs / probs.sum()), probs.size - 1)


def product(a, b):
    if a.n_modes != 1 or b.n_modes != 1 or a.cutoff != b.cutoff:
        raise ValueError("product needs two single-mode matrices with equal cutoff")
    return FockDensityMatrix(np.kron(a.rho, b.rho), a.cutoff, 2, a.leakage + b.leakage)


def apply_unitary_generator(state, kind, param, mode=0):
    """Apply ``U rho U^dag`` where ``U = exp(G)`` for one of the circuit generators.

    ``kind`` is ``"phase"`` (``i theta a^dag a``), ``"displacement"``
    (``alpha a^dag - alpha* a``) or ``"two_mode_squeeze"``
    (``xi (a^dag b^dag - a b)``, acting on both modes). Matrix elements are
    computed on a padded space and then truncated, so the result is
    renormalised and the lost weight recorded as leakage.
    """
    d = state.cutoff + 1
    n = state.n_modes
    if kind == "phase":
        phases = np.exp(1j * param * np.arange(d))
        if n == 2:
            phases = np.kron(phases, np.ones(d)) if mode == 0 else np.kron(np.ones(d), phases)
        return _derived(state, phases[:, None] * state.rho * phases.conj()[None, :])
    if kind == "displacement":
        if not 0 <= mode < n:
            raise IndexError(mode)
        a = _annihilation(d + _PAD)
        U = expm(param * a.conj().T - np.conj(param) * a)[:d, :d]
        rho = _sandwich(state.rho, U, U, mode, n, d)
        return _derived(state, rho).normalized()
    if kind == "two_mode_squeeze":
        if n != 2:
            raise ValueError("two-mode squeezing needs a two-mode matrix")
        U = _tms_unitary(param, d)
        return _derived(state, U @ state.rho @ U.T).normalized()
    raise ValueError(f"unsupported generator {kind!r}")


def _tms_unitary(xi, d):
    """Truncated ``exp(xi (a^dag b^dag - a b))`` restricted to ``d x d`` levels.

    The generator conserves ``n_a - n_b``, so each difference sector is a small
    tridiagonal block exponentiated on its own (padded, then truncated).
    """
    dp = d + _PAD
    U = np.zeros((d * d, d * d))
    for diff in range(-(d - 1), d):
        size = dp - abs(diff)
        ma, mb = max(diff, 0), max(-diff, 0)
        a = ma + np.arange(size)
        b = mb + np.arange(size)
        up = np.sqrt((a[:-1] + 1.0) * (b[:-1] + 1.0))
        G = xi * (np.diag(up, -1) - np.diag(up, 1))
        block = expm(G)
        ok = (a < d) & (b < d)
        idx = a[ok] * d + b[ok]
        U[np.ix_(idx, idx)] = block[np.ix_(ok, ok)]
    return U


def loss_kraus(eta, cutoff):
    """Kraus operators ``A_k`` of the pure-loss channel, ``k = 0..cutoff``.

    ``A_k = sum_j sqrt(C(j, k)) eta^{(j-k)/2} (1-eta)^{k/2} |j-k><j|``.
    """
    if not 0 <= eta <= 1:
        raise ValueError(f"transmissivity must lie in [0, 1], got {eta}")
    d = cutoff + 1
    ops = []
    for k in range(d):
        A = np.zeros((d, d))
        for j in range(k, d):
            A[j - k, j] = np.sqrt(_binom(j, k) * eta ** (j - k) * (1 - eta) ** k)
        ops.append(A)
    return ops


def amplifier_kraus(gain, cutoff):
    """Kraus operators of the quantum-limited amplifier with ``gain >= 1``.

    Obtained by two-mode squeezing against a vacuum ancilla and tracing the
    ancilla: ``B_k |n> = sqrt(C(n+k, k)) G^{-(n+1)/2} (1 - 1/G)^{k/2} |n+k>``.
    Outputs above the cutoff are dropped (reported as leakage).
    """
    if gain < 1:
        raise ValueError(f"gain must be >= 1, got {gain}")
    d = cutoff + 1
    ops = []
    for k in range(d):
        B = np.zeros((d, d))
        for n in range(d - k):
            B[n + k, n] = np.sqrt(_binom(n + k, k) * gain ** (-(n + 1)) * (1 - 1 / gain) ** k)
        ops.append(B)
    return ops


def _binom(n, k):
    return float(np.exp(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)))


def apply_kraus(state, ops, mode=0):
    """``sum_k K_k rho K_k^dag`` with every ``K_k`` acting on ``mode``."""
    if not 0 <= mode < state.n_modes:
        raise IndexError(mode)
    d = state.cutoff + 1
    n = state.n_modes
    rho = np.zeros_like(state.rho)
    r_in = state.rho.reshape((d,) * (2 * n))
    r_out = rho.reshape((d,) * (2 * n))
    for K in ops:
        rows, cols = np.nonzero(K)
        if len(set(rows)) == rows.size and len(set(cols)) == cols.size:
            # single entry per row and column: a weighted index map
            _shift_add(r_out, r_in, rows, cols, K[rows, cols], mode, n)
        else:
            rho += _sandwich(state.rho, K, K, mode, n, d)
    return _derived(state, rho)


def _shift_add(r_out, r_in, rows, cols, vals, mode, n_modes):
    w = np.outer(vals, np.conj(vals))
    t_out = np.moveaxis(r_out, (mode, n_modes + mode), (0, 1))
    t_in = np.moveaxis(r_in, (mode, n_modes + mode), (0, 1))
    w = w.reshape(w.shape + (1,) * (t_in.ndim - 2))
    if _contiguous(rows) and _contiguous(cols):
        ro = slice(rows[0], rows[-1] + 1)
        co = slice(cols[0], cols[-1] + 1)
        t_out[ro, ro] += w * t_in[co, co]
    else:
        t_out[rows[:, None], rows[None, :]] += w * t_in[cols[:, None], cols[None, :]]


def _contiguous(idx):
    return idx.size > 0 and idx[-1] - idx[0] == idx.size - 1 and np.all(np.diff(idx) == 1)


def attenuate_kraus(state, eta, mode=0):
    """Pure loss of transmissivity ``eta`` on ``mode`` via its Kraus expansion."""
    return apply_kraus(state, loss_kraus(eta, state.cutoff), mode)


def amplify_kraus(state, gain, mode=0):
    return apply_kraus(state, amplifier_kraus(gain, state.cutoff), mode).normalized()


def thermal_tms_fock(state, mu_T, mode=0):
    """Noise added by two-mode squeezing with a vacuum ancilla (gain ``1 + mu_T``)."""
    if mu_T < 0:
        raise ValueError("thermal photon number must be non-negative")
    return amplify_kraus(state, 1 + mu_T, mode)


def additive_noise_fock(state, mu_T, mode=0):
    """Classical additive noise of ``mu_T`` photons: loss ``1/G`` then gain ``G = 1 + mu_T``."""
    if mu_T < 0:
        raise ValueError("thermal photon number must be non-negative")
    g = 1 + mu_T
    return amplify_kraus(attenuate_kraus(state, 1 / g, mode), g, mode)


def uhlmann_fidelity(a, b):
    """``Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a))`` via Hermitian eigendecompositions.

    ``sqrt(rho_a)`` is formed on the support of ``rho_a`` (eigenvalues above
    ``1e-15``); eigenvalues below zero within ``-1e-8`` are clipped.
    """
    if a.rho.shape != b.rho.shape:
        raise ValueError(f"dimension mismatch: {a.rho.shape} vs {b.rho.shape}")
    vals, vecs = eigh(a.rho, subset_by_value=[SUPPORT_TOL, np.inf], driver="evr")
    half = vecs * np.sqrt(vals)
    inner = half.conj().T @ b.rho @ half
    lam = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    if lam.size and lam[0] < -EIG_CLIP:
        raise ValueError(f"matrix is not positive semi-definite (eigenvalue {lam[0]:.3e})")
    f = float(np.sum(np.sqrt(np.clip(lam, 0, None))))
    return min(max(f, 0.0), 1.0)


def photon_statistics(state):
    """Return ``(mean, v, diagonal)`` where ``v = <n^2> - <n>``."""
    if state.n_modes != 1:
        raise ValueError("photon statistics are defined here for single-mode states only")
    diag = np.real(np.diag(state.rho)).copy()
    n = np.arange(diag.size)
    mean = float(n @ diag)
    second = float(n**2 @ diag)
    return mean, second - mean, diag


def mean_photons_fock(state, mode=0):
    return photon_statistics(state.reduced(mode))[0]


def min_eigenvalue(state):
    return float(np.linalg.eigvalsh(state.rho)[0])
