"""Acceptance gate: one test per criterion, each printed as PASS or FAIL in the summary.

Run with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""

import itertools
import time
from dataclasses import replace

import numpy as np

from sampling import fock_state, gaussian_state, random_pairs
from thaqkd import attack, cli, fock, gaussian, keyrate, separable, shutter


def test_criterion_01_oracle_equivalence(record_property):
    start = time.perf_counter()
    worst = 0.0
    for pa, pb in random_pairs(50, seed=2024):
        fg = gaussian.fidelity(gaussian_state(pa), gaussian_state(pb))
        ff = fock.uhlmann_fidelity(fock_state(pa, 30), fock_state(pb, 30))
        worst = max(worst, abs(fg - ff))
    elapsed = time.perf_counter() - start
    record_property("detail", f"max |F_gauss - F_fock| = {worst:.2e} over 50 pairs in {elapsed:.1f} s")
    assert worst <= 1e-4
    assert elapsed < 60


def test_criterion_02_closed_form_consistency(record_property):
    # mu_T >= 1 keeps the published (vacuum-free) moments physical at every eta
    grid = list(itertools.product([0.01, 0.1, 0.5, 1.0, 2.0], [1.0, 2.0, 5.0, 10.0], [1e-3, 1e-2, 0.1, 0.5, 1.0]))
    assert len(grid) == 100
    unit = max(abs(attack.closed_form_fidelity(1.0, 0.0, mu_T, eta) - 1) for _, mu_T, eta in grid)
    coherent = abs(attack.closed_form_fidelity(1.0, 0.1, 0.0, 1.0) - np.exp(-0.1))
    gap = 0.0
    for mu_D, mu_T, eta in grid:
        pair = attack.build_returned_pair(attack.AttackConfig(N=mu_D / eta, eta=eta, mu_T=mu_T), "paper_exact")
        gap = max(gap, abs(pair.fidelity() - attack.closed_form_fidelity(1.0, mu_D, mu_T, eta)))
    record_property("detail", f"|F(mu_D=0) - 1| = {unit:.1e}, |F - e^-mu_D| = {coherent:.1e}, "
                              f"max gap to generic fidelity = {gap:.1e} (omega = 1 grid)")
    assert unit <= 1e-12
    assert coherent <= 1e-12
    assert gap <= 1e-9


def test_criterion_03_no_squeezing_is_optimal(record_property):
    bad = []
    for N, eta, mu_T in itertools.product([1e2, 1e4, 1e8], [1e-9, 1e-6, 1e-3], [0.0, 1.0, 5.0]):
        res = attack.optimal_p(N, eta, mu_T, n_grid=64, refine=False)
        if res.grid_argmin != 0.0:
            bad.append((N, eta, mu_T, res.grid_argmin))
    record_property("detail", f"{27 - len(bad)}/27 grid points have argmin p = 0")
    assert not bad


def test_criterion_04_bound_ordering(record_property):
    violations = 0
    for mu in np.arange(1, 101) / 100:
        d = [separable.separable_delta_bound(mu), separable.lucamarini_delta(mu),
             attack.distinguishability(attack.simplified_fidelity(mu, 1.0)),
             attack.distinguishability(attack.simplified_fidelity(mu, 5.0))]
        violations += not (d[0] > d[1] > d[2] > d[3])
    sep, luc = separable.separable_delta_bound(0.1), separable.lucamarini_delta(0.1)
    record_property("detail", f"{violations} ordering violations; separable(0.1) = {sep:.6f}, coherent(0.1) = {luc:.6f}")
    assert violations == 0
    assert abs(sep - 0.081054) <= 1e-5
    assert abs(luc - 0.049842) <= 1e-5


def test_criterion_05_pnrd_matches_bucket(record_property):
    start = time.perf_counter()
    grid = np.linspace(0.0, 1.0, 20)
    worst, worse_psucc = 0.0, 0
    for mu_T, T, Q in itertools.product(grid * 10, np.linspace(0.05, 1.0, 20), grid * 0.5):
        b, p = keyrate.bucket_stats(mu_T, T, Q), keyrate.pnrd_stats(mu_T, T, Q)
        worst = max(worst, abs(b.eps - p.eps))
        worse_psucc += p.p_succ > b.p_succ
    elapsed = time.perf_counter() - start
    record_property("detail", f"max |eps diff| = {worst:.1e}, p_succ violations = {worse_psucc}, {elapsed:.2f} s")
    assert worst <= 1e-12
    assert worse_psucc == 0
    assert elapsed < 5


def test_criterion_06_survival_and_bimodal(record_property):
    checks = separable.survival_monte_carlo(1000, cutoff=20, eta_range=(1e-4, 0.1), seed=11)
    held = sum(c.holds for c in checks)
    ys = np.linspace(0, 1, 200)
    fmin = min(separable.bimodal_inequality_check(y, p) for y in ys for p in ys)
    record_property("detail", f"{held}/1000 states hold; min f = {fmin:.2e}")
    assert held == 1000
    assert fmin >= -1e-12


def test_criterion_07_thermal_defense_range(record_property):
    cfg = cli.RunConfig()
    assert (cfg.mu_D, cfg.L0_km) == (0.1, 25.0)
    Ls = np.arange(0.0, 120.5, 0.5)
    ratios, dominance = [], True
    tau_max = max(cfg.tau_labels)
    for tau in cfg.tau_labels:
        LQ = cfg.L_Q_km * tau / tau_max
        base = keyrate.distance_sweep(cfg.mu_D, Ls, cfg.L0_km, LQ, optimize=False)
        opt = keyrate.distance_sweep(cfg.mu_D, Ls, cfg.L0_km, LQ)
        dominance &= all(o.K >= b.K for o, b in zip(opt, base))

        def k_base(L):
            return keyrate.thermal_key_rate(cfg.mu_D, 0.0, keyrate.ChannelModel(L, cfg.L0_km, LQ)).K

        def k_opt(L):
            return keyrate.optimize_thermal(cfg.mu_D, keyrate.ChannelModel(L, cfg.L0_km, LQ))[1].K

        ratios.append((tau, keyrate.secure_range(base, k_base), keyrate.secure_range(opt, k_opt)))
    longest = ratios[-1]
    detail = ", ".join(f"tau {t:g}: {b:.2f} -> {o:.2f} km (x{o / b:.3f})" for t, b, o in ratios)
    record_property("detail", detail + ("" if dominance else "; K_opt < K_base somewhere"))
    assert dominance
    assert 20 <= longest[1] <= 60
    assert longest[2] / longest[1] >= 1.5


def test_criterion_08_shutter_staircase(record_property):
    from fractions import Fraction

    cfg = shutter.ShutterConfig()
    mismatches = 0
    for k in range(1, 1001):
        t = Fraction(k, 1000)
        expect = next(R for R in range(1, cfg.R_max + 1) if (R * t) % 1 <= Fraction(1, 10))
        mismatches += shutter.reflection_count(replace(cfg, t_L=k / 1000)) != expect
    rows = shutter.travel_time_sweep(replace(cfg, N=1e4), shutter.default_grid())
    t = np.array([r.t_L for r in rows])
    raw = np.array([r.K_raw for r in rows])
    identity = np.array_equal(shutter.minimizing_convolution(t, raw, 0.0), raw)
    below = all(r.K_convolved <= r.K_raw for r in rows)
    record_property("detail", f"{mismatches} staircase mismatches; delta=0 identity {identity}; convolved <= raw {below}")
    assert mismatches == 0 and identity and below


def test_criterion_09_shutter_calibration(record_property, tmp_path):
    out = tmp_path / "fig5.csv"
    assert cli.main(["fig5", "--calibrate_N", "true", "--output", str(out)]) == 0
    header = dict(line[2:].split("=", 1) for line in out.read_text().splitlines() if line.startswith("# ") and "=" in line)
    N = float(header["calibrated_N"])
    grid = shutter.default_grid()
    base = shutter.ShutterConfig(N=N, eps=0.0, eta_R=0.5)
    best_1 = shutter.best_convolved_rate(replace(base, delta=0.01), grid)
    best_2 = shutter.best_convolved_rate(replace(base, delta=0.02), grid)
    record_property("detail", f"N = {N:.6g}: best K at delta 0.01 = {best_1:.4f}, at delta 0.02 = {best_2:.4f}")
    assert best_1 >= 0.9
    assert 0.65 <= best_2 <= 0.85


def test_criterion_10_deterministic_datasets(record_property, tmp_path):
    same = []
    for name in ("fig3", "fig4", "fig5"):
        outputs = []
        for run in range(2):
            path = tmp_path / f"{name}_{run}.csv"
            assert cli.main([name, "--output", str(path)]) == 0
            outputs.append(path.read_bytes())
        same.append(outputs[0] == outputs[1])
    record_property("detail", ", ".join(f"{n} identical={s}" for n, s in zip(("fig3", "fig4", "fig5"), same)))
    assert all(same)


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
