"""Distinguishability bound for arbitrary separable probe states.

After strong attenuation Eve's returned state is split into a part with at
most two photons and a remainder. The remainder is pessimistically treated as
revealing the phase perfectly. The part inside the two-photon subspace is
parameterised by the returned mean photon number ``mu`` and one off-diagonal
coefficient ``beta``.
"""

from dataclasses import dataclass

import numpy as np

from . import fock

PSD_TOL = 1e-10
MU_MAX = 2.0


def _check_mu(mu):
    if not 0 <= mu <= MU_MAX:
        raise ValueError(f"mu must lie in [0, {MU_MAX}], got {mu}")


def beta_max(mu):
    """Largest ``beta`` keeping the worst-case subspace matrix positive semi-definite."""
    _check_mu(mu)
    return 0.5 * np.sqrt(mu * (2 - mu))


@dataclass(frozen=True, eq=False)
class SubspaceState:
    """Returned state projected onto span{|0>, |1>, |2>}, for one encoding phase.

    ``alpha_term`` is ``v + <n>^2 + <n>`` of the state Eve sent in, with
    ``v = <n^2> - <n>``.
    """

    matrix: np.ndarray
    mu: float
    eta: float
    alpha_term: float
    beta: float

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3) or not np.allclose(m, m.T, atol=1e-14):
            raise ValueError("subspace matrix must be real symmetric 3x3")
        lam = float(np.linalg.eigvalsh(m)[0])
        if lam < -PSD_TOL:
            raise ValueError(f"subspace matrix is not positive semi-definite (min eigenvalue {lam:.3e})")
        if np.trace(m) > 1 + PSD_TOL:
            raise ValueError(f"subspace matrix has trace {np.trace(m):.6g} > 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix)[0])


def rho_sub(mu, eta, alpha_term, beta, theta=0.0):
    """Subspace matrix for phase ``theta`` in {0, pi/2}; the quarter phase flips ``beta``."""
    if np.isclose(theta, 0.0):
        sign = 1.0
    elif np.isclose(theta, np.pi / 2):
        sign = -1.0
    else:
        raise ValueError(f"theta must be 0 or pi/2, got {theta}")
    if mu < 0 or not 0 <= eta <= 1 or alpha_term < 0:
        raise ValueError("need mu >= 0, 0 <= eta <= 1 and alpha_term >= 0")
    half = eta**2 * alpha_term / 2
    m = np.array(
        [
            [1 - mu + half, 0.0, sign * beta],
            [0.0, mu - 2 * half, 0.0],
            [sign * beta, 0.0, half],
        ]
    )
    return SubspaceState(m, mu, eta, alpha_term, sign * beta)


def worst_case_pair(mu, eta=1e-3):
    """The two subspace states that minimise the fidelity at returned mean ``mu``.

    The variance is chosen to empty the one-photon entry and ``beta`` is set to
    :func:`beta_max`. The result does not depend on ``eta``.
    """
    _check_mu(mu)
    alpha_term = mu / eta**2
    b = beta_max(mu)
    return rho_sub(mu, eta, alpha_term, b, 0.0), rho_sub(mu, eta, alpha_term, b, np.pi / 2)


def separable_delta_bound(mu):
    """Closed-form bound on the distinguishability for separable probes."""
    _check_mu(mu)
    return float((1 - np.exp(-mu) * np.sqrt(1 - 3 * mu * (2 - mu) / 4)) / 2)


def constructive_separable_delta(mu):
    """Distinguishability obtained by building the worst-case returned states explicitly.

    Each returned state is ``e^{-mu}`` times the worst-case subspace state plus
    ``1 - e^{-mu}`` on a flag state that is orthogonal to everything else and
    to the other phase's flag. Flags sit on levels 3 and 4 of a five-level
    space so the generic Uhlmann fidelity can be reused.
    """
    s0, s1 = worst_case_pair(mu)
    w = np.exp(-mu)
    mats = []
    for sub, flag in ((s0, 3), (s1, 4)):
        m = np.zeros((5, 5))
        m[:3, :3] = w * sub.matrix
        m[flag, flag] = 1 - w
        mats.append(fock.FockDensityMatrix(m, 4))
    return (1 - fock.uhlmann_fidelity(*mats)) / 2


def lucamarini_delta(mu):
    """Coherent-probe distinguishability ``(1 - e^{-mu} cos mu) / 2``, clamped to [0, 1/2]."""
    if mu < 0:
        raise ValueError(f"mu must be non-negative, got {mu}")
    return float(np.clip((1 - np.exp(-mu) * np.cos(mu)) / 2, 0.0, 0.5))


@dataclass(frozen=True)
class SurvivalCheck:
    lhs: float
    rhs: float
    holds: bool


def survival_bound_check(state, eta):
    """Check that at least ``e^{-mu}`` of the state has two or fewer photons after loss.

    ``lhs`` is that population after :func:`fock.attenuate_kraus`, ``rhs`` is
    ``exp(-eta <n>)`` with ``<n>`` taken before the loss.
    """
    if state.n_modes != 1:
        raise ValueError("survival check needs a single-mode state")
    mean, _, _ = fock.photon_statistics(state)
    out = fock.attenuate_kraus(state, eta)
    lhs = float(np.sum(np.real(np.diag(out.rho))[:3]))
    rhs = float(np.exp(-eta * mean))
    return SurvivalCheck(lhs, rhs, lhs >= rhs - 1e-10)


def bimodal_inequality_check(y, p):
    """``f(p) = -y^p + p y - p + 1``, which is non-negative on the unit square."""
    if not (0 <= y <= 1 and 0 <= p <= 1):
        raise ValueError(f"need y and p in [0, 1], got y={y}, p={p}")
    if y == 0:
        return 1.0 - p if p > 0 else 0.0
    return float(-(y**p) + p * y - p + 1)


def random_diagonal_states(n, cutoff=20, seed=0):
    """``n`` photon-number mixtures drawn from a flat Dirichlet, one sub-seed per state."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [fock.diagonal_state(np.random.default_rng(c).dirichlet(np.ones(cutoff + 1))) for c in children]


def survival_monte_carlo(n=1000, cutoff=20, eta_range=(1e-4, 0.1), seed=0):
    """Run :func:`survival_bound_check` on random states with log-uniform ``eta``."""
    states = random_diagonal_states(n, cutoff, seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(n + 1)[-1])
    etas = np.exp(rng.uniform(np.log(eta_range[0]), np.log(eta_range[1]), n))
    return [survival_bound_check(s, float(e)) for s, e in zip(states, etas)]
