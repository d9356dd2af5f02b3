"""Batch front end: one subcommand per experiment.

Exit codes: 0 success, 2 config or usage error, 3 data error (unreadable or
incomplete zero data), 4 invariant failure (oracle mismatch, residual above
tolerance).
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import analytic, characters, dirichletpoly, experiments, identities, oracle, sieve, zeros
from .config import KEYS, RunConfig, check_consistent, load_config
from .experiments import ConfigError
from .reports import Report

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INVARIANT = 0, 2, 3, 4
COMMON = ("seed", "format", "out", "cache_dir", "threads")


class InvariantError(RuntimeError):
    """A checked identity or oracle comparison failed."""


def _expect(ok: bool, message: str) -> None:
    if not ok:
        raise InvariantError(message)


def _dataset(cfg: RunConfig) -> zeros.ZeroDataset:
    path = cfg["zeros_file"]
    return zeros.ingest(path) if path else zeros.load_zeta_zeros()


# --- subcommands -------------------------------------------------------------


def cmd_sieve(cfg: RunConfig) -> Report:
    if cfg["h"] is None:
        cfg.set("h", 100.0)
    y, h, q, a = cfg["y"], cfg["h"], cfg["q"], cfg["a"]
    rep = Report("sieve", cfg.resolved(("y", "h", "q", "a")), ["n", "lambda", "is_prime"])
    tab = sieve.table(sieve.window(y, h)[1] + 1)
    for n in tab.prime_powers_in(y, h).tolist():
        if n % q == a % q:
            rep.add(n, float(tab.lam[n]), bool(tab.is_prime[n]))
    primes = oracle.window_primes(y, h)
    fast = [int(p) for p in tab.primes_in(y, h).tolist()]
    rep.aggregate = {
        "psi_short": sieve.psi_short(y, h, q, a % q),
        "theta_short": sieve.theta_short(y, h, q, a % q),
        "primes": len(fast),
        "oracle_agrees": fast == primes,
    }
    _expect(fast == primes, "sieve primes disagree with the brute-force enumerator")
    return rep


def cmd_characters(cfg: RunConfig) -> Report:
    q = cfg["q"]
    rep = Report("characters", cfg.resolved(("q",)), ["key", "order", "parity", "conductor", "primitive", "real"])
    for chi in characters.enumerate_characters(q):
        rep.add(chi.key, chi.order, chi.parity, chi.conductor, chi.is_primitive, chi.is_real)
    resid = characters.orthogonality_residual(q)
    gauss = [abs(abs(characters.gauss_sum(chi)) - math.sqrt(q)) for chi in characters.primitive_characters(q)]
    rep.aggregate = {"orthogonality_residual": resid, "gauss_modulus_residual": max(gauss, default=0.0)}
    _expect(resid <= 1e-9, f"orthogonality residual {resid:.3e} above 1e-9")
    _expect(max(gauss, default=0.0) <= 1e-9, "Gauss-sum modulus off sqrt(q)")
    return rep


def cmd_hb_verify(cfg: RunConfig) -> Report:
    nmax, k0 = cfg["nmax"], cfg["k0"]
    rep = Report("hb-verify", cfg.resolved(("nmax", "k0")), ["k0", "max_residual", "worst_n"])
    lam = sieve.table(nmax + 1).lam[: nmax + 1]
    worst = 0.0
    for k in range(1, k0 + 1):
        diff = np.abs(identities.heath_brown_table(nmax, k) - lam)
        i = int(np.argmax(diff))
        rep.add(k, float(diff[i]), i)
        worst = max(worst, float(diff[i]))
    rep.aggregate = {"max_residual": worst}
    _expect(worst <= 1e-9, f"Heath-Brown residual {worst:.3e} above 1e-9")
    return rep


def cmd_partition_check(cfg: RunConfig) -> Report:
    win = identities.make_smooth_window(cfg["bump"])
    xs = np.geomspace(1.0, cfg["x_max"], cfg["points"])
    dev = np.array([abs(identities.partition_check(win, float(x)) - 1) for x in xs])
    rep = Report("partition-check", cfg.resolved(("bump", "points", "x_max")), ["x", "deviation"])
    for i in np.argsort(-dev)[:20].tolist():
        rep.add(float(xs[i]), float(dev[i]))
    rep.aggregate = {"max_deviation": float(dev.max())}
    _expect(dev.max() <= 1e-8, f"partition deviation {dev.max():.3e} above 1e-8")
    return rep


def cmd_afe_check(cfg: RunConfig) -> Report:
    rep = Report("afe-check", cfg.resolved(("q_max", "n_len", "t", "r")), ["key", "N", "t", "r", "residual"])
    worst = 0.0
    for q in range(1, cfg["q_max"] + 1):
        for chi in characters.primitive_characters(q):
            for t in cfg["t"]:
                for r in cfg["r"]:
                    inst = analytic.AFEInstance(chi, cfg["n_len"], t=t, r=int(r))
                    res = abs(analytic.afe_smoothed_sum(inst) - analytic.afe_transformed_sum(inst))
                    rep.add(chi.key, cfg["n_len"], t, int(r), res)
                    worst = max(worst, res)
    rep.aggregate = {"max_residual": worst}
    _expect(worst <= 1e-5, f"AFE residual {worst:.3e} above 1e-5")
    return rep


def cmd_funceq_check(cfg: RunConfig) -> Report:
    ts = np.arange(-cfg["t_max"], cfg["t_max"] + cfg["t_step"] / 2, cfg["t_step"])
    rep = Report("funceq-check", cfg.resolved(("q_max", "t_max", "t_step")), ["key", "max_residual"])
    worst = 0.0
    for q in range(1, cfg["q_max"] + 1):
        for chi in characters.primitive_characters(q):
            res = max(analytic.functional_equation_residual(chi, complex(0.5, float(t))) for t in ts)
            rep.add(chi.key, res)
            worst = max(worst, res)
    rep.aggregate = {"max_residual": worst}
    _expect(worst <= 1e-6, f"functional-equation residual {worst:.3e} above 1e-6")
    return rep


def cmd_meanvalue(cfg: RunConfig) -> Report:
    N, Q, T = int(cfg["n_len"]), cfg["q_max"], cfg["t_height"]
    rng = np.random.default_rng(cfg["seed"])
    polys = [dirichletpoly.CoeffSequence(1, rng.choice([-1.0, 1.0], N)) for _ in range(cfg["trials"])]
    ratios = dirichletpoly.mean_value_ratios(polys, Q, T)
    rep = Report("meanvalue", cfg.resolved(("n_len", "q_max", "t_height", "trials", "seed")), ["trial", "ratio"])
    for i, r in enumerate(ratios.tolist()):
        rep.add(i, r)
    rep.aggregate = {"max_ratio": float(ratios.max()), "mean_ratio": float(ratios.mean())}
    _expect(ratios.max() <= 10, f"mean-value ratio {ratios.max():.3f} above 10")
    return rep


def cmd_large_values(cfg: RunConfig) -> Report:
    N, T, U = cfg["n_len"], cfg["t_height"], cfg["u"]
    win = identities.make_smooth_window(cfg["bump"])
    polys = [identities.build_coefficients(identities.Role.WINDOW, N, win) for _ in U]
    family = dirichletpoly.primitive_family(cfg["q_max"])
    sets = dirichletpoly.extract_large_values(polys, family, T, U)
    rep = Report(
        "large-values",
        cfg.resolved(("n_len", "t_height", "u", "q_max", "bump")),
        ["set", "key", "t"] + [f"abs_F{j + 1}" for j in range(len(U))],
    )
    for s in sets:
        for p in s.points:
            rep.add(s.parity, p.key, p.t, *p.magnitudes)
    ok = all(s.is_well_spaced() and s.satisfies_thresholds() for s in sets)
    rep.aggregate = {
        "sizes": [len(s) for s in sets],
        "well_spaced": ok,
        "bound_ratio": [dirichletpoly.large_value_bound_check(len(s), N, cfg["q_max"] ** 2 * T, min(U), 1, 0)
                        for s in sets],
    }
    _expect(ok, "large-value sets are not well spaced or break their thresholds")
    return rep


def cmd_zeros_count(cfg: RunConfig) -> Report:
    ds = _dataset(cfg)
    key, sigma, T = cfg["character"], cfg["sigma"], cfg["t_height"]
    count = zeros.count_zeros(ds, sigma, T, key)
    brute = sum(1 for r in ds.records(key) if r.beta >= sigma and abs(r.gamma) <= T)
    rep = Report("zeros-count", cfg.resolved(("zeros_file", "character", "sigma", "t_height")),
                 ["key", "sigma", "T", "count"])
    rep.add(key, sigma, T, count)
    rep.aggregate = {"count": count, "record_count": brute, "complete_to": ds.complete_to(key)}
    _expect(count == brute, f"count {count} disagrees with record scan {brute}")
    return rep


def cmd_density_audit(cfg: RunConfig) -> Report:
    ds = _dataset(cfg)
    params = zeros.DensityParams(c=cfg["density_c"], M_exp=cfg["m_exp"], sigma0_override=cfg["sigma"])
    Q, T, sigma = cfg["q_max"], cfg["t_height"], cfg["sigma"]
    ratio = zeros.density_ratio(ds, Q, T, sigma, params)
    rep = Report("density-audit", cfg.resolved(("zeros_file", "q_max", "t_height", "sigma", "density_c", "m_exp")),
                 ["key", "count"])
    for q in range(1, Q + 1):
        for chi in characters.primitive_characters(q):
            rep.add(chi.key, zeros.count_zeros(ds, sigma, T, chi.key))
    rep.aggregate = {"density_ratio": ratio,
                     "exceptional_moduli": sorted(zeros.exceptional_moduli(ds, Q, T, params))}
    return rep


def cmd_explicit_formula(cfg: RunConfig) -> Report:
    ds = _dataset(cfg)
    key, y, eta = cfg["character"], cfg["y"], cfg["eta"] if cfg["eta"] is not None else 0.5
    chi = characters.from_key(key)
    direct = zeros.psi0_difference(y, eta * y, None if chi.modulus == 1 else chi)
    rep = Report("explicit-formula", cfg.resolved(("zeros_file", "character", "y", "eta", "t0")),
                 ["T0", "reconstruction_re", "reconstruction_im", "error"])
    for T0 in cfg["t0"]:
        value = zeros.explicit_formula_sum(ds, key, y, eta, T0)
        rep.add(T0, value.real, value.imag, abs(value - direct))
    rep.aggregate = {"direct": direct}
    return rep


def cmd_e_average(cfg: RunConfig) -> Report:
    exp_cfg = cfg.experiment()
    kind = cfg["kind"]
    keys = ("x", "h", "theta", "q_max", "a_exp", "epsilon", "samples", "strata", "seed", "theorem", "kind", "exact")
    if cfg["exact"]:
        value = experiments.averaged_error_exact(exp_cfg, kind)
        rep = Report("e-average", cfg.resolved(keys), [])
        rep.aggregate = {"normalized": value, "normalized_per_modulus": value / exp_cfg.Q}
        return rep
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", experiments.HypothesisWarning)
        er = experiments.averaged_error(exp_cfg, kind, check_oracle=cfg["verify"])
    rep = Report("e-average", cfg.resolved(keys), ["y", "q", "E", "Eprime", "Elambda"])
    for row in er.rows:
        rep.add(row["y"], row["q"], row["E"], row["Eprime"], row["Elambda"])
    rep.aggregate = dict(er.aggregate, warnings=[str(w.message) for w in caught])
    _expect(er.mismatches == 0, f"{er.mismatches} sampled values disagree with the oracle")
    return rep


def cmd_dyadic_check(cfg: RunConfig) -> Report:
    rng = np.random.default_rng(cfg["seed"])
    rep = Report("dyadic-check", cfg.resolved(("trials", "seed", "x")),
                 ["y", "h", "q", "eta", "lhs", "rhs", "blocks"])
    x = cfg["x"] or 1e6
    fails = 0
    for _ in range(cfg["trials"]):
        y = float(rng.uniform(10, x))
        h = float(rng.uniform(1, y / 2))
        q = int(rng.integers(1, 31))
        eta = float(10 ** rng.uniform(-3, 0))
        chk = experiments.dyadic_cover_check(y, h, q, eta)
        fails += not chk.holds
        rep.add(y, h, q, eta, chk.lhs, chk.rhs, chk.blocks)
    rep.aggregate = {"failures": fails}
    _expect(fails == 0, f"{fails} covering inequalities failed")
    return rep


def cmd_thm3_count(cfg: RunConfig) -> Report:
    exp_cfg = cfg.experiment()
    keys = ("x", "h", "theta", "q_max", "c", "mode", "samples", "seed", "verify")
    rep = Report("thm3-count", cfg.resolved(keys), ["c", "passes", "total", "fraction", "oracle_passes"])
    mismatches = 0
    for c in cfg["c"]:
        pf = experiments.theorem3_pair_fraction(exp_cfg, c, cfg["mode"], check_oracle=cfg["verify"])
        mismatches += pf.mismatches
        rep.add(c, pf.passes, pf.total, pf.fraction, pf.oracle_passes)
    grid = [round(0.1 * i, 10) for i in range(1, 31)]
    rep.aggregate = {"mismatches": mismatches, "threshold_curve": experiments.pair_threshold_curve(exp_cfg, grid)}
    _expect(mismatches == 0, f"pair counts disagree with the oracle by {mismatches}")
    return rep


def cmd_smk(cfg: RunConfig) -> Report:
    M, K = cfg["m_max"], cfg["k_max"]
    count = experiments.smk_count(M, K)
    fails = experiments.smk_failures(M, K)
    rep = Report("smk", cfg.resolved(("m_max", "k_max", "verify")), ["m", "k"])
    for m, k in fails:
        rep.add(m, k)
    rep.aggregate = {"count": count, "ratio": count / (M * K), "failures": len(fails)}
    if cfg["verify"]:
        ref = oracle.smk_count(M, K)
        rep.aggregate["oracle_count"] = ref
        _expect(ref == count, f"smk_count {count} disagrees with the oracle {ref}")
    return rep


COMMANDS = {
    "sieve": (cmd_sieve, ("y", "h", "q", "a"), "prime powers in a window and its Chebyshev sums"),
    "characters": (cmd_characters, ("q",), "character table, orthogonality and Gauss sums"),
    "hb-verify": (cmd_hb_verify, ("nmax", "k0"), "Heath-Brown decomposition against sieved Lambda"),
    "partition-check": (cmd_partition_check, ("bump", "points", "x_max"), "dyadic partition of unity"),
    "afe-check": (cmd_afe_check, ("q_max", "n_len", "t", "r"), "smoothed sum against its transformed form"),
    "funceq-check": (cmd_funceq_check, ("q_max", "t_max", "t_step"), "L-function functional equation"),
    "meanvalue": (cmd_meanvalue, ("n_len", "q_max", "t_height", "trials"), "hybrid mean-value ratios"),
    "large-values": (cmd_large_values, ("n_len", "t_height", "u", "q_max", "bump"), "large-value sets"),
    "zeros-count": (cmd_zeros_count, ("zeros_file", "character", "sigma", "t_height"), "zero counts N(sigma,T,chi)"),
    "density-audit": (cmd_density_audit, ("zeros_file", "q_max", "t_height", "sigma", "density_c", "m_exp"),
                      "zero-density ratio and exceptional moduli"),
    "explicit-formula": (cmd_explicit_formula, ("zeros_file", "character", "y", "eta", "t0"),
                         "psi difference rebuilt from zeros"),
    "e-average": (cmd_e_average, ("x", "h", "theta", "q_max", "a_exp", "epsilon", "samples", "strata",
                                  "theorem", "kind", "exact", "verify"), "averaged error terms"),
    "dyadic-check": (cmd_dyadic_check, ("x", "trials"), "geometric covering inequality"),
    "thm3-count": (cmd_thm3_count, ("x", "h", "theta", "q_max", "c", "mode", "samples", "verify"),
                   "pairs with every class stocked"),
    "smk": (cmd_smk, ("m_max", "k_max", "verify"), "pairs (m,k) with a prime in the Hasse interval"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shortprimes", description="Primes in short progressions at desk scale.")
    subs = parser.add_subparsers(dest="command", metavar="command")
    for name, (_, keys, help_text) in COMMANDS.items():
        sub = subs.add_parser(name, help=help_text)
        sub.add_argument("--config", help="key = value config file")
        for key in dict.fromkeys(keys + COMMON):
            flags = ["--" + key.replace("_", "-")] + (["--file"] if key == "zeros_file" else [])
            sub.add_argument(*flags, dest=key, default=None, help=KEYS[key][2])
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    func, keys, _ = COMMANDS[args.command]
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        flags = RunConfig()
        for key in dict.fromkeys(keys + COMMON):
            value = getattr(args, key)
            if value is not None:
                flags.set(key, value)
        if "h" in flags and "theta" in cfg:
            cfg.values.pop("theta")
        if "theta" in flags and "h" in cfg:
            cfg.values.pop("h")
        cfg = cfg.merged(flags)
        check_consistent(cfg)
        if cfg["format"] not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {cfg['format']!r}")
        if cfg["cache_dir"]:
            sieve.set_cache_dir(cfg["cache_dir"])
        report = func(cfg)
        report.config.setdefault("seed", cfg["seed"])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (zeros.ZeroFileError, zeros.CompletenessError, zeros.MissingCharacterError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = report.render(cfg["format"])
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
