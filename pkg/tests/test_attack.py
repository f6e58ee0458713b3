import itertools

import numpy as np
import pytest

from thaqkd import attack as a
from thaqkd import gaussian as g


def test_config_derived_quantities():
    cfg = a.AttackConfig(N=100, p=0.0, eta=1e-3)
    assert cfg.omega == 1.0
    assert np.isclose(cfg.mu_D, 0.1)
    sq = a.AttackConfig(N=2.0, p=0.5)
    assert np.isclose(np.cosh(2 * sq.squeeze_r), sq.omega)
    assert np.isclose(sq.omega, np.sqrt(1 + 4 * sq.p * sq.N))
    for bad in (dict(N=-1), dict(N=1, p=1.2), dict(N=1, eta=0.0), dict(N=1, mu_T=-0.1)):
        with pytest.raises(ValueError):
            a.AttackConfig(**bad)


def test_no_probe_gives_identical_states():
    pair = a.build_returned_pair(a.AttackConfig(N=0.0))
    assert pair.state_0 == pair.state_quarter
    assert np.isclose(pair.fidelity(), 1.0, atol=1e-12)


def test_physical_pair_is_displaced_thermal_signal():
    cfg = a.AttackConfig(N=50, p=0.0, eta=2e-3, mu_T=0.3)
    pair = a.build_returned_pair(cfg)
    assert np.isclose(g.mean_photons(pair.state_0, 0), cfg.mu_D + cfg.mu_T)
    assert np.isclose(pair.fidelity(), a.simplified_fidelity(cfg.mu_D, cfg.mu_T), atol=1e-12)


def test_fidelity_independent_of_phi_without_squeezing():
    vals = [a.build_returned_pair(a.AttackConfig(N=80, phi=phi, eta=1e-3, mu_T=0.4)).fidelity()
            for phi in np.linspace(0, 2 * np.pi, 7)]
    assert np.allclose(vals, vals[0], atol=1e-13)


def test_paper_exact_has_no_correlations_at_omega_one():
    (_, cov0), (_, cov1) = a.paper_exact_moments(1.0, 0.1, 0.0, 0.5)
    assert np.allclose(cov0[:2, 2:], 0)
    assert np.allclose(cov1[:2, 2:], 0)


def test_closed_form_reference_values():
    for mu_T in (0.0, 0.3, 1.0, 7.0):
        assert np.isclose(a.closed_form_fidelity(1.0, 0.0, mu_T, 1.0), 1.0, atol=1e-12)
    assert np.isclose(a.closed_form_fidelity(1.0, 0.1, 0.0, 1.0), np.exp(-0.1), atol=1e-12)
    # 40-digit evaluation of the same expression
    assert np.isclose(a.closed_form_fidelity(1.2, 0.05, 0.5, 0.01), 0.90407418350809757589, atol=1e-14)
    with pytest.raises(ValueError):
        a.closed_form_fidelity(0.5, 0.1, 0.0, 1.0)


def test_closed_form_matches_generic_fidelity_at_omega_one():
    for mu_D, mu_T, eta in itertools.product([0.05, 0.7], [1.0, 4.0], [1e-3, 0.3, 1.0]):
        pair = a.build_returned_pair(a.AttackConfig(N=mu_D / eta, eta=eta, mu_T=mu_T), "paper_exact")
        assert np.isclose(pair.fidelity(), a.closed_form_fidelity(1.0, mu_D, mu_T, eta), atol=1e-9)


def test_closed_form_departs_from_generic_fidelity_with_squeezing():
    # known gap: the printed prefactor is off once the idler is correlated
    cfg = a.AttackConfig(N=0.75, p=1.0, eta=0.5, mu_T=1.0)
    generic = a.build_returned_pair(cfg, "paper_exact").fidelity()
    closed = a.closed_form_fidelity(cfg.omega, 0.0, 1.0, 0.5)
    assert abs(generic - closed) > 1e-2


def test_closed_form_and_simplified_agree_only_without_loss():
    cf, simple = a.eq_gap(0.1, 0.5, 1.0)
    assert np.isclose(cf, simple, atol=1e-12)
    cf, simple = a.eq_gap(0.1, 0.5, 0.1)
    assert np.isclose(cf, np.exp(-0.1 / (0.5 + 0.1 * 1.5)), atol=1e-12)
    assert not np.isclose(cf, simple)


def test_simplified_fidelity_values_and_monotonicity():
    assert a.simplified_fidelity(0.0, 3.0) == 1.0
    assert np.isclose(a.simplified_fidelity(0.1, 0.0), 0.904837, atol=1e-6)
    assert np.isclose(a.simplified_fidelity(0.1, 1.0), 0.967216, atol=1e-6)
    mu = np.linspace(0, 3, 31)
    assert np.all(np.diff(a.simplified_fidelity(mu, 0.5)) < 0)
    assert np.all(np.diff(a.simplified_fidelity(0.5, mu)) > 0)


def test_distinguishability():
    assert a.distinguishability(1.0) == 0.0
    assert a.distinguishability(0.0) == 0.5
    assert np.isclose(a.distinguishability(0.904837), 0.0475815, atol=1e-7)
    with pytest.raises(ValueError):
        a.distinguishability(1.1)


@pytest.mark.parametrize("N,eta,mu_T", [(1e6, 1e-7, 0.0), (1e4, 1e-5, 1.0)])
def test_optimal_p_is_zero(N, eta, mu_T):
    res = a.optimal_p(N, eta, mu_T, n_grid=64)
    assert res.grid_argmin == 0.0
    # refinement may find a slightly lower value just above p = 0, never a better region
    assert res.p_star < 1 / 63
    assert res.log_fidelity >= res.grid_log_fidelity[0] - 1e-6


def test_optimal_p_degenerate_budget():
    res = a.optimal_p(0.0, 0.5, 0.0, n_grid=64)
    assert res.grid_argmin == 0.0
    assert np.allclose(res.grid_log_fidelity, 0.0)


def test_budget_audit_flags_omega_parameterisation():
    rep = a.budget_audit(a.AttackConfig(N=10.0, p=0.3))
    assert rep["accounting_consistent"]
    assert np.isclose(rep["squeeze_photons"], (np.sqrt(1 + 4 * 3.0) - 1) / 2)
    assert rep["budget_mismatch"]
    assert not a.budget_audit(a.AttackConfig(N=10.0, p=0.0))["budget_mismatch"]


def test_loss_model_discrepancy_report():
    rep = a.loss_model_discrepancy(a.AttackConfig(N=1e3, p=0.0, eta=1e-4, mu_T=0.0))
    assert rep["max_cov_diff"] > 0.5
    assert not rep["paper_state_physical"]
