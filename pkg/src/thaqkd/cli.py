"""Command-line front end that writes CSV datasets.

Usage::

    thaqkd <command> [--config FILE] [--key value]...

Config files hold one ``key=value`` per line; ``#`` starts a comment. Flags
given on the command line override the file. Exit status is 0 on success, 2
for invalid input and 3 when a computation fails.
"""

import argparse
import csv
import io
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from . import attack, fock, gaussian, keyrate, separable, shutter

COMMANDS = ("fidelity", "keyrate", "optimize-thermal", "separable", "shutter", "fig3", "fig4", "fig5", "selfcheck")


class ConfigError(ValueError):
    pass


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    # key rate and thermal defence
    mu_D: float = 0.1
    L0_km: float = 25.0
    L_Q_km: float = 5e4  # dephasing length of the longest-memory label
    tau_labels: tuple = (2.0, 5.0, 10.0)
    mu_T: float = 0.0
    mu_T_min: float = 1e-4
    mu_T_max: float = 1e3
    mu_T_grid: int = 128
    detector: str = "bucket"
    L_min_km: float = 0.0
    L_max_km: float = 60.0
    L_step_km: float = 0.5
    # Gaussian probe
    N: float = 100.0
    p: float = 0.0
    phi: float = 0.0
    eta: float = 1e-3
    noise: str = "additive"
    # separable bound
    mu_points: int = 100
    mu_max: float = 1.0
    mc_samples: int = 1000
    # shutter
    t_L: float = 0.9
    t_S: float = 0.1
    t_P: float = 1.0
    eta_R: float = 0.5
    shutter_N: float = 1e6
    delta: float = 0.01
    R_max: int = 10_000
    eps: float = 0.0
    t_points: int = 1000
    calibrate_N: bool = False
    # run
    rng_seed: int = 0
    output: str = "-"


_PARSERS = {float: float, int: int, str: str, bool: _bool, tuple: _floats}

_RANGES = {
    "mu_D": lambda v: v >= 0,
    "L0_km": lambda v: v > 0,
    "L_Q_km": lambda v: v > 0,
    "tau_labels": lambda v: len(v) > 0 and all(t > 0 for t in v),
    "mu_T": lambda v: v >= 0,
    "mu_T_min": lambda v: v > 0,
    "mu_T_max": lambda v: v > 0,
    "mu_T_grid": lambda v: v >= 1,
    "detector": lambda v: v in ("bucket", "pnrd"),
    "L_min_km": lambda v: v >= 0,
    "L_max_km": lambda v: v >= 0,
    "L_step_km": lambda v: v > 0,
    "N": lambda v: v >= 0,
    "p": lambda v: 0 <= v <= 1,
    "eta": lambda v: 0 < v <= 1,
    "noise": lambda v: v in ("additive", "tms"),
    "mu_points": lambda v: v >= 1,
    "mu_max": lambda v: 0 < v <= separable.MU_MAX,
    "mc_samples": lambda v: v >= 1,
    "t_L": lambda v: v > 0,
    "t_S": lambda v: v > 0,
    "t_P": lambda v: v > 0,
    "eta_R": lambda v: 0 < v < 1,
    "shutter_N": lambda v: v >= 0,
    "delta": lambda v: v >= 0,
    "R_max": lambda v: v >= 1,
    "eps": lambda v: 0 <= v <= 1,
    "t_points": lambda v: v >= 1,
    "rng_seed": lambda v: v >= 0,
}


def _field_types():
    return {f.name: type(f.default) for f in fields(RunConfig)}


def _parse_pairs(pairs, base):
    """Apply ``(where, key, raw)`` triples to ``base``; ``where`` labels errors."""
    types = _field_types()
    updates = {}
    for where, key, raw in pairs:
        if key not in types:
            raise ConfigError(f"{where}: unknown key {key!r}")
        try:
            value = _PARSERS[types[key]](raw.strip())
        except ValueError:
            raise ConfigError(f"{where}: cannot parse {key}={raw.strip()!r}") from None
        check = _RANGES.get(key)
        if check is not None and not check(value):
            raise ConfigError(f"{where}: {key}={raw.strip()} is out of range")
        updates[key] = value
    cfg = replace(base, **updates)
    if cfg.t_S >= cfg.t_P:
        raise ConfigError("t_S must be smaller than t_P")
    if cfg.L_max_km < cfg.L_min_km or cfg.mu_T_max < cfg.mu_T_min:
        raise ConfigError("sweep range is empty")
    return cfg


def parse_config(text, overrides=(), base=None):
    """Build a :class:`RunConfig` from ``key=value`` text plus ``(key, value)`` overrides."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = line.split("=", 1)
        pairs.append((f"line {lineno}", key.strip(), raw))
    pairs.extend((f"--{k}", k, v) for k, v in overrides)
    return _parse_pairs(pairs, base or RunConfig())


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return str(v)


@dataclass
class Dataset:
    columns: list
    rows: list
    notes: dict


def render(command, cfg, data):
    """CSV text: ``#`` header with version, command, resolved config and notes, then the table.

    The output path is left out so the same run gives the same bytes wherever it is written.
    """
    buf = io.StringIO()
    buf.write(f"# thaqkd {__version__}\n# command={command}\n")
    for f in fields(RunConfig):
        if f.name == "output":
            continue
        buf.write(f"# {f.name}={_fmt(getattr(cfg, f.name))}\n")
    for k, v in data.notes.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(data.columns)
    for row in data.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _L_grid(cfg):
    n = int(np.floor((cfg.L_max_km - cfg.L_min_km) / cfg.L_step_km + 1e-9)) + 1
    return cfg.L_min_km + cfg.L_step_km * np.arange(n)


def _opt_kwargs(cfg):
    return {"mu_range": (cfg.mu_T_min, cfg.mu_T_max), "n_grid": cfg.mu_T_grid, "detector": cfg.detector}


def _sweep_dataset(rows):
    cols = ["L_km", "K", "K_raw", "eps", "eps_tilde", "p_succ", "mu_T_opt"]
    return Dataset(cols, [[getattr(r, c) for c in cols] for r in rows], {})


def cmd_fidelity(cfg):
    ac = attack.AttackConfig(cfg.N, cfg.p, cfg.phi, cfg.eta, cfg.mu_T)
    pair = attack.build_returned_pair(ac, "physical", cfg.noise)
    lf = pair.log_fidelity()
    simple = attack.simplified_fidelity(ac.mu_D, cfg.mu_T)
    closed = attack.closed_form_fidelity(1.0, ac.mu_D, cfg.mu_T, cfg.eta) if cfg.p == 0 else float("nan")
    cols = ["mu_D", "omega", "fidelity", "log_fidelity", "delta", "fidelity_simplified", "fidelity_closed_form"]
    row = [ac.mu_D, ac.omega, np.exp(lf), lf, attack.distinguishability(np.exp(lf)), simple, closed]
    return Dataset(cols, [row], {})


def cmd_keyrate(cfg):
    rows = keyrate.distance_sweep(cfg.mu_D, _L_grid(cfg), cfg.L0_km, cfg.L_Q_km, optimize=False, mu_T=cfg.mu_T)
    return _sweep_dataset(rows)


def cmd_optimize_thermal(cfg):
    rows = keyrate.distance_sweep(cfg.mu_D, _L_grid(cfg), cfg.L0_km, cfg.L_Q_km, **_opt_kwargs(cfg))
    return _sweep_dataset(rows)


def _label(tau):
    return f"{tau:g}"


def cmd_fig3(cfg):
    Ls = _L_grid(cfg)
    tau_max = max(cfg.tau_labels)
    cols, columns, notes = ["L_km"], [Ls], {}
    for tau in cfg.tau_labels:
        LQ = cfg.L_Q_km * tau / tau_max
        base = keyrate.distance_sweep(cfg.mu_D, Ls, cfg.L0_km, LQ, optimize=False)
        opt = keyrate.distance_sweep(cfg.mu_D, Ls, cfg.L0_km, LQ, **_opt_kwargs(cfg))
        lab = _label(tau)
        cols += [f"K_base_tau{lab}", f"K_opt_tau{lab}", f"mu_T_opt_tau{lab}"]
        columns += [[r.K for r in base], [r.K for r in opt], [r.mu_T_opt for r in opt]]
        notes[f"L_Q_km_tau{lab}"] = LQ
    return Dataset(cols, [list(r) for r in zip(*columns)], notes)


def _mu_grid(cfg):
    return cfg.mu_max * np.arange(1, cfg.mu_points + 1) / cfg.mu_points


def cmd_fig4(cfg):
    rows = []
    for mu in _mu_grid(cfg):
        thermal = [attack.distinguishability(attack.simplified_fidelity(mu, t)) for t in (1.0, 5.0)]
        rows.append([mu, separable.separable_delta_bound(mu), separable.lucamarini_delta(mu), *thermal])
    cols = ["mu", "delta_separable", "delta_lucamarini", "delta_thermal_mu1", "delta_thermal_mu5"]
    return Dataset(cols, rows, {})


def cmd_separable(cfg):
    rows = [
        [mu, separable.beta_max(mu), separable.separable_delta_bound(mu),
         separable.constructive_separable_delta(mu), separable.lucamarini_delta(mu)]
        for mu in _mu_grid(cfg)
    ]
    checks = separable.survival_monte_carlo(cfg.mc_samples, 20, (1e-4, 0.1), cfg.rng_seed)
    notes = {
        "survival_checks": len(checks),
        "survival_holds": sum(c.holds for c in checks),
        "survival_min_margin": min(c.lhs - c.rhs for c in checks),
    }
    cols = ["mu", "beta_max", "delta_separable", "delta_constructive", "delta_lucamarini"]
    return Dataset(cols, rows, notes)


def _shutter_cfg(cfg, N=None):
    return shutter.ShutterConfig(
        cfg.t_L, cfg.t_S, cfg.t_P, cfg.eta_R, cfg.shutter_N if N is None else N, cfg.delta, cfg.R_max, cfg.eps
    )


def cmd_shutter(cfg):
    R, mu, res = shutter.shutter_key_rate(_shutter_cfg(cfg))
    cols = ["t_L_over_tP", "R", "mu", "delta_used", "eps_tilde", "K", "K_raw"]
    return Dataset(cols, [[cfg.t_L / cfg.t_P, R, mu, res.delta_used, res.eps_tilde, res.K, res.K_raw]], {})


def cmd_fig5(cfg):
    grid = shutter.default_grid(cfg.t_points) * cfg.t_P
    notes = {}
    N = cfg.shutter_N
    if cfg.calibrate_N:
        found = shutter.calibrate_N(_shutter_cfg(cfg), grid)
        if found is None:
            raise ArithmeticError("calibrate_N: no probe size meets both key-rate targets")
        N, best_1, best_2 = found
        notes = {"calibrated_N": N, "best_K_convolved_delta0.01": best_1, "best_K_convolved_delta0.02": best_2}
    rows = shutter.travel_time_sweep(_shutter_cfg(cfg, N), grid)
    cols = ["t_L_over_tP", "R", "mu", "K_raw", "K_convolved"]
    return Dataset(cols, [[r.t_L / cfg.t_P, r.R, r.mu, r.K_raw, r.K_convolved] for r in rows], notes)


def _check_oracle(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(5):
        alpha = rng.uniform(0, 1.2) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        eta, mu_T = rng.uniform(0.1, 1), rng.uniform(0, 2)
        g_states, f_states = [], []
        for a in (alpha, 1j * alpha):
            s = gaussian.add_thermal_additive(gaussian.pure_loss(gaussian.coherent(a), 0, eta), 0, mu_T)
            g_states.append(s)
            r = fock.additive_noise_fock(fock.attenuate_kraus(fock.coherent_fock(a), eta), mu_T)
            f_states.append(r)
        worst = max(worst, abs(gaussian.fidelity(*g_states) - fock.uhlmann_fidelity(*f_states)))
    return worst <= 1e-4, f"max |F_gauss - F_fock| = {worst:.3e}"


def _check_pnrd():
    grid = np.linspace(0.01, 0.99, 10)
    worst = 0.0
    ok = True
    for mu_T in grid * 5:
        for T in grid:
            for Q in grid / 2:
                b, n = keyrate.bucket_stats(mu_T, T, Q), keyrate.pnrd_stats(mu_T, T, Q)
                worst = max(worst, abs(b.eps - n.eps))
                ok &= n.p_succ <= b.p_succ + 1e-15
    return ok and worst <= 1e-12, f"max |eps_pnrd - eps_bucket| = {worst:.3e}"


def _check_survival(cfg):
    checks = separable.survival_monte_carlo(min(cfg.mc_samples, 200), 20, (1e-4, 0.1), cfg.rng_seed)
    held = sum(c.holds for c in checks)
    return held == len(checks), f"{held}/{len(checks)} states satisfy the survival bound"


def _check_ordering():
    ok = True
    for mu in np.arange(1, 101) / 100:
        d = [separable.separable_delta_bound(mu), separable.lucamarini_delta(mu),
             attack.distinguishability(attack.simplified_fidelity(mu, 1.0)),
             attack.distinguishability(attack.simplified_fidelity(mu, 5.0))]
        ok &= d[0] > d[1] > d[2] > d[3]
    return ok, "separable > coherent > thermal(1) > thermal(5) on 100 points"


def _check_staircase():
    from fractions import Fraction

    cfg = shutter.ShutterConfig()
    for k in range(1, 1001):
        t = Fraction(k, 1000)
        expect = next(R for R in range(1, cfg.R_max + 1) if (R * t) % 1 <= Fraction(1, 10))
        if shutter.reflection_count(replace(cfg, t_L=k / 1000)) != expect:
            return False, f"mismatch at t_L={k / 1000}"
    return True, "1000 travel times match exact rational iteration"


def cmd_selfcheck(cfg):
    checks = [
        ("gaussian_vs_fock", lambda: _check_oracle(cfg.rng_seed)),
        ("pnrd_vs_bucket", _check_pnrd),
        ("survival_bound", lambda: _check_survival(cfg)),
        ("fig4_ordering", _check_ordering),
        ("shutter_staircase", _check_staircase),
    ]
    rows = []
    for name, fn in checks:
        ok, detail = fn()
        rows.append([name, "PASS" if ok else "FAIL", detail])
    passed = sum(r[1] == "PASS" for r in rows)
    return Dataset(["check", "status", "detail"], rows, {"passed": f"{passed}/{len(rows)}"})


HANDLERS = {
    "fidelity": cmd_fidelity,
    "keyrate": cmd_keyrate,
    "optimize-thermal": cmd_optimize_thermal,
    "separable": cmd_separable,
    "shutter": cmd_shutter,
    "fig3": cmd_fig3,
    "fig4": cmd_fig4,
    "fig5": cmd_fig5,
    "selfcheck": cmd_selfcheck,
}


def _split_overrides(tokens):
    pairs = []
    it = iter(tokens)
    for tok in it:
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            value = next(it, None)
            if value is None:
                raise ConfigError(f"--{key}: missing value")
        pairs.append((key, value))
    return pairs


def run_command(name, cfg):
    """Run ``name`` and return ``(csv_text, dataset)``."""
    data = HANDLERS[name](cfg)
    return render(name, cfg, data), data


def main(argv=None):
    parser = argparse.ArgumentParser(prog="thaqkd", description="Trojan-horse QKD analysis datasets.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="file with key=value lines")
    args, rest = parser.parse_known_args(argv)
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text, _split_overrides(rest))
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        out, data = run_command(args.command, cfg)
    except ValueError as exc:
        print(f"error in {args.command}: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure in {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if cfg.output == "-":
        sys.stdout.write(out)
    else:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    if args.command == "selfcheck" and any(r[1] != "PASS" for r in data.rows):
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
