"""Command-line entry point.

Every subcommand resolves a config (defaults, then --config, then
flags), runs one experiment, and writes CSV/JSON artifacts plus a
manifest with the config hash and per-file checksums into the output
directory.  Numbers in CSVs are written with repr(), so a rerun with
the same config and seed is byte-identical regardless of --threads.

Exit status: 0 on success, 2 for a config problem, 3 when --check
was requested and the built-in consistency check failed.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import lattice as lat
from .environment import EnvParams
from .evolving import df_key_check, drift_suite, growth_experiment
from .randomness import stream_value, subkey, uniform_from_bits
from .runconfig import ConfigError, resolve_config, resolve_out, \
    write_manifest
from .staticperc import P_C_TRIANGULAR_SITE, P_C_Z2_BOND, h_cluster_compare, \
    one_arm_sweep, theta_estimate
from .stats import linear_fit, loglog_fit
from .svgplot import emit_svg
from .walker import markov_type_ratios, msd_experiment, reference_msd_row, \
    sigma_hat, sigma_sweep, tail_survival
from . import __version__

# critical one-arm exponent of two-dimensional site percolation on the
# triangular lattice, used as the --check reference at p = p_c
ONE_ARM_EXPONENT = -5.0 / 48.0

MSD_HEADER = ["t", "mean_sq_graph_dist", "stderr", "mean_sq_l2",
              "stderr_l2", "replicas", "p", "mu", "lattice", "d", "seed"]
SIGMA_HEADER = ["lattice", "d", "p", "mu", "t", "replicas", "sigma2",
                "ci_lo", "ci_hi", "sigma2_l2", "ci_lo_l2", "ci_hi_l2",
                "slope_diag"]
ONEARM_HEADER = ["r", "p", "trials", "successes", "phat", "ci_lo", "ci_hi"]
HCLUSTER_HEADER = ["mu", "t", "r", "p_ever", "trials", "successes_dyn",
                   "successes_static", "z", "p_value"]
THETA_HEADER = ["lattice", "L", "p", "replicas", "successes", "theta_hat",
                "ci_lo", "ci_hi"]
EVOLVING_HEADER = ["instance", "side", "mu", "p", "phi", "phi_bound",
                   "lhs", "rhs", "pass"]
DF_HEADER = ["f", "estimator_walk", "estimator_set", "z"]
GROWTH_HEADER = ["m", "size_mean", "size_q10", "size_q90"]
TAIL_HEADER = ["level", "survival", "ci_lo", "ci_hi", "successes",
               "replicas"]
MARKOV_HEADER = ["k", "s", "t", "ratio", "ci_lo", "ci_hi"]
DUMP_HEADER = ["time", "unit", "state"]


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows, preamble=()):
    lines = list(preamble)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode())
    return path


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"not JSON-serializable: {type(o)!r}")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _lattice(cfg):
    return lat.LatticeKind(cfg["lattice"], int(cfg.get("d", 2)), cfg.get("L"))


def _params(cfg, args, lk=None, mu=None, p=None):
    return EnvParams(lk if lk is not None else _lattice(cfg),
                     cfg["p"] if p is None else p,
                     cfg["mu"] if mu is None else mu,
                     allow_large_mu=args.allow_large_mu)


def _fit_or_none(fit):
    if fit is None:
        return {"slope": None, "stderr": None, "r2": None, "cutoff": None}
    return {"slope": fit.slope, "stderr": fit.stderr_slope, "r2": fit.r2,
            "cutoff": fit.cutoff}


def _dump_env(cfg, args, outdir, times):
    """env_dump.csv for replica 0: one row per sampled unit with its
    last query time and state, preceded by the initial Bernoulli(p)
    bitset in packed-unit order."""
    lk = _lattice(cfg)
    params = _params(cfg, args, lk=lk)
    ts = sorted({float(t) for t in times})
    env, _, _, _, _ = reference_msd_row(params, np.asarray(ts), cfg["seed"], 0)
    bits = []
    rows = []
    for unit, t_last, state, _draws in env.dump_records():
        pid = lat.pack_unit(lk, unit)
        u0 = uniform_from_bits(stream_value(subkey(env.env_key, pid), 0))
        bits.append("1" if u0 < params.p else "0")
        rows.append((float(t_last), int(pid), int(state)))
    path = os.path.join(outdir, "env_dump.csv")
    return write_csv(path, DUMP_HEADER, rows,
                     preamble=["# initial " + "".join(bits)])


# ---------------------------------------------------------------------------
# subcommand handlers: handler(cfg, args, outdir) -> (files, check_ok)


def _run_msd(cfg, args, outdir):
    params = _params(cfg, args)
    cps = np.asarray(cfg["t_grid"], dtype=float)
    table = msd_experiment(params, cps, cfg["replicas"], cfg["seed"],
                           cfg["threads"])
    rows = [
        (float(t), float(mg), float(sg), float(ml), float(sl),
         cfg["replicas"], cfg["p"], cfg["mu"], cfg["lattice"],
         params.lattice.d, cfg["seed"])
        for t, mg, sg, ml, sl in zip(table.checkpoints, table.mean_sq_graph,
                                     table.stderr_graph, table.mean_sq_l2,
                                     table.stderr_l2)
    ]
    files = [write_csv(os.path.join(outdir, "msd.csv"), MSD_HEADER, rows)]
    ok = bool(np.all(np.isfinite(table.mean_sq_graph))
              and np.all(table.mean_sq_graph >= 0.0))
    note = ""
    if cfg["p"] == 1.0 and cfg["replicas"] >= 100:
        sh = sigma_hat(table)
        # with every bond open each attempted move succeeds, so the
        # Euclidean MSD per unit time is exactly 1
        ok = ok and 0.9 <= sh.value_l2 <= 1.1
        note = f", sigma2_l2 {sh.value_l2:.4f}"
    if args.svg:
        files.append(emit_svg(
            [(table.checkpoints, table.mean_sq_graph),
             (table.checkpoints, table.mean_sq_l2)],
            ["graph distance", "euclidean"],
            os.path.join(outdir, "plot.svg"),
            title="mean squared displacement",
            xlabel="t", ylabel="E[dist^2]"))
    if args.dump_env:
        files.append(_dump_env(cfg, args, outdir, cfg["t_grid"]))
    print(f"msd: {len(rows)} checkpoints, {cfg['replicas']} replicas, "
          f"final MSD {table.mean_sq_graph[-1]:.4f}{note}")
    return files, ok


def _run_sigma_sweep(cfg, args, outdir):
    n = cfg["n_checkpoints"]
    t = float(cfg["t"])
    cps = np.linspace(t / n, t, n)
    rows = []
    series = []
    labels = []
    ok = True
    for ci, case in enumerate(cfg["cases"]):
        lk = lat.LatticeKind(case["lattice"], int(case.get("d", 2)),
                             case.get("L"))
        p = case["p"]
        hats = sigma_sweep(lk, p, cfg["mus"], cps, cfg["replicas"],
                           cfg["seed"] + 10000 * ci, cfg["threads"],
                           allow_large_mu=args.allow_large_mu)
        vals = []
        for mu, sh in hats:
            rows.append((case["lattice"], lk.d, p, mu, sh.t,
                         cfg["replicas"], sh.value, sh.ci_lo, sh.ci_hi,
                         sh.value_l2, sh.ci_lo_l2, sh.ci_hi_l2,
                         sh.slope_diagnostic))
            vals.append(sh.value)
        series.append((list(cfg["mus"]), vals))
        labels.append(f"{case['lattice']} p={p}")
        p_c = P_C_TRIANGULAR_SITE if case["lattice"] == "triangular" \
            else P_C_Z2_BOND
        ratio = max(vals) / min(vals) if min(vals) > 0 else math.inf
        # regime shape: refresh rate matters below p_c, barely above
        if p < p_c:
            ok = ok and vals == sorted(vals) and ratio > 1.5
        elif p > p_c:
            ok = ok and ratio < 2.0
        print(f"sigma-sweep: {case['lattice']} p={p} "
              f"sigma2 range [{min(vals):.4f}, {max(vals):.4f}]")
    files = [write_csv(os.path.join(outdir, "sigma_sweep.csv"),
                       SIGMA_HEADER, rows)]
    if args.svg:
        files.append(emit_svg(series, labels,
                              os.path.join(outdir, "plot.svg"),
                              title="diffusivity vs refresh rate",
                              xlabel="mu", ylabel="sigma^2",
                              loglog=True))
    return files, ok


def _run_onearm(cfg, args, outdir):
    lk = lat.LatticeKind(cfg["lattice"], cfg["d"], None)
    rows = one_arm_sweep(lk, cfg["r_grid"], cfg["trials"], cfg["seed"],
                         p=cfg["p"], rule=cfg["rule"],
                         threads=cfg["threads"],
                         window_exponent=cfg["window_exponent"])
    csv_rows = [(r.r, r.p, r.trials, r.successes, r.phat, r.ci_lo, r.ci_hi)
                for r in rows]
    files = [write_csv(os.path.join(outdir, "onearm.csv"),
                       ONEARM_HEADER, csv_rows)]
    pos = [(r.r, r.phat) for r in rows if r.phat > 0.0]
    fit = None
    if len([1 for r, _ in pos if r >= cfg["fit_cutoff"]]) >= 2:
        fit = loglog_fit([r for r, _ in pos], [ph for _, ph in pos],
                         x_min=cfg["fit_cutoff"])
    files.append(write_json(os.path.join(outdir, "onearm_fit.json"),
                            _fit_or_none(fit)))
    phats = [r.phat for r in rows]
    ok = all(b <= a for a, b in zip(phats, phats[1:]))
    critical = cfg["p"] is None and cfg["rule"] == "fixed"
    if critical and fit is not None and max(cfg["r_grid"]) >= 64:
        ok = ok and abs(fit.slope - ONE_ARM_EXPONENT) <= 0.05
    if args.svg:
        ann = None
        if fit is not None:
            ann = (f"slope {fit.slope:.4f} +/- {fit.stderr_slope:.4f}, "
                   f"R^2 {fit.r2:.4f}")
        files.append(emit_svg([([r for r, _ in pos], [ph for _, ph in pos])],
                              ["P(0 <-> radius r)"],
                              os.path.join(outdir, "plot.svg"),
                              title="one-arm probability",
                              xlabel="r", ylabel="phat", loglog=True,
                              annotation=ann))
    msg = f"onearm: {len(rows)} radii, trials {cfg['trials']}"
    if fit is not None:
        msg += f", slope {fit.slope:.4f} (R^2 {fit.r2:.4f})"
    print(msg)
    return files, ok


def _run_hcluster(cfg, args, outdir):
    lk = lat.LatticeKind(cfg["lattice"], 2, None)
    p_c = cfg["p"]
    if p_c is None:
        p_c = P_C_TRIANGULAR_SITE if cfg["lattice"] == "triangular" \
            else P_C_Z2_BOND
    rows = []
    idx = 0
    for mu in cfg["mus"]:
        for t in cfg["ts"]:
            cmp_ = h_cluster_compare(lk, cfg["r"], p_c, mu, t,
                                     cfg["trials"],
                                     cfg["seed"] + 7919 * idx,
                                     cfg["threads"])
            rows.append(cmp_)
            idx += 1
    csv_rows = [(r.mu, r.t, r.r, r.p_ever, r.trials, r.successes_dyn,
                 r.successes_static, r.z, r.p_value) for r in rows]
    files = [write_csv(os.path.join(outdir, "hcluster.csv"),
                       HCLUSTER_HEADER, csv_rows)]
    ok = all(r.p_value > 0.01 for r in rows)
    if args.svg:
        xs = list(range(len(rows)))
        files.append(emit_svg(
            [(xs, [r.successes_dyn / r.trials for r in rows]),
             (xs, [r.successes_static / r.trials for r in rows])],
            ["dynamics over [0, t]", "static at p_ever"],
            os.path.join(outdir, "plot.svg"),
            title="h-cluster equivalence", xlabel="case index",
            ylabel="success fraction"))
    worst = min((r.p_value for r in rows), default=1.0)
    print(f"hcluster: {len(rows)} cases, min p-value {worst:.4f}")
    return files, ok


def _run_theta(cfg, args, outdir):
    results = []
    for i, L in enumerate(cfg["Ls"]):
        lk = lat.LatticeKind(cfg["lattice"], 2, int(L))
        results.append((int(L), theta_estimate(lk, cfg["p"],
                                               cfg["replicas"],
                                               cfg["seed"] + i,
                                               cfg["threads"])))
    csv_rows = [(cfg["lattice"], L, cfg["p"], res.replicas, res.successes,
                 res.theta_hat, res.ci_lo, res.ci_hi)
                for L, res in results]
    files = [write_csv(os.path.join(outdir, "theta.csv"),
                       THETA_HEADER, csv_rows)]
    L_max, best = max(results, key=lambda t: t[0])
    files.append(write_json(os.path.join(outdir, "theta_summary.json"), {
        "L": L_max,
        "theta_hat": best.theta_hat,
        "ci_lo": best.ci_lo,
        "ci_hi": best.ci_hi,
        "note": "largest-side estimate; finite-size bias decays with L",
    }))
    ok = all(0.0 <= r.ci_lo <= r.theta_hat <= r.ci_hi <= 1.0
             for _, r in results)
    if cfg["p"] >= 0.7:
        ok = ok and all(r.theta_hat > 0.5 for _, r in results)
    elif cfg["p"] <= 0.3:
        ok = ok and all(r.theta_hat < 0.5 for _, r in results)
    if args.svg:
        Ls = [L for L, _ in results]
        files.append(emit_svg(
            [(Ls, [r.theta_hat for _, r in results]),
             (Ls, [r.ci_lo for _, r in results]),
             (Ls, [r.ci_hi for _, r in results])],
            ["theta_hat", "ci_lo", "ci_hi"],
            os.path.join(outdir, "plot.svg"),
            title="origin in the giant cluster", xlabel="L",
            ylabel="theta"))
    print(f"theta: p={cfg['p']}, largest side {L_max}: "
          f"{best.theta_hat:.4f} [{best.ci_lo:.4f}, {best.ci_hi:.4f}]")
    return files, ok


def _run_evolving_check(cfg, args, outdir):
    rows = drift_suite(cfg["instances"], cfg["seed"],
                       sides=tuple(cfg["sides"]), mus=tuple(cfg["mus"]),
                       ps=tuple(cfg["ps"]))
    csv_rows = [(r.instance, r.side, r.mu, r.p, r.phi, r.phi_bound,
                 r.lhs, r.rhs, r.passed) for r in rows]
    files = [write_csv(os.path.join(outdir, "evolving_check.csv"),
                       EVOLVING_HEADER, csv_rows)]
    bound_ok = all(r.phi >= r.phi_bound - 1e-12 for r in rows)
    drift_ok = all(r.passed for r in rows)
    ok = bound_ok and drift_ok
    if args.svg:
        pts = sorted((r.rhs, r.lhs) for r in rows)
        lo = min(min(r.rhs, r.lhs) for r in rows)
        hi = max(max(r.rhs, r.lhs) for r in rows)
        files.append(emit_svg(
            [([p[0] for p in pts], [p[1] for p in pts]), ([lo, hi], [lo, hi])],
            ["instances", "lhs = rhs"],
            os.path.join(outdir, "plot.svg"),
            title="drift inequality", xlabel="rhs", ylabel="lhs"))
    n_fail = sum(1 for r in rows if not r.passed)
    print(f"evolving-check: {len(rows)} instances, {n_fail} drift "
          f"failures, boundary bound {'ok' if bound_ok else 'VIOLATED'}")
    return files, ok


def _run_df_check(cfg, args, outdir):
    lk = lat.LatticeKind(lat.HYPERCUBIC, 2, cfg["side"])
    params = _params(cfg, args, lk=lk)
    rows = df_key_check(params, cfg["steps"], cfg["runs"], cfg["seed"])
    files = [write_csv(os.path.join(outdir, "df_check.csv"),
                       DF_HEADER, rows)]
    ok = all(abs(z) <= 4.0 for _, _, _, z in rows)
    if args.svg:
        xs = list(range(len(rows)))
        files.append(emit_svg([(xs, [z for _, _, _, z in rows])],
                              ["z per test function"],
                              os.path.join(outdir, "plot.svg"),
                              title="coupling estimator agreement",
                              xlabel="function index", ylabel="z"))
    zmax = max((abs(z) for _, _, _, z in rows), default=0.0)
    print(f"df-check: {cfg['runs']} runs x {cfg['steps']} steps, "
          f"max |z| {zmax:.3f}")
    return files, ok


def _run_growth(cfg, args, outdir):
    lk = lat.LatticeKind(lat.HYPERCUBIC, 2, cfg["L"])
    params = _params(cfg, args, lk=lk)
    window = None
    if cfg["fit_lo"] is not None and cfg["fit_hi"] is not None:
        window = (cfg["fit_lo"], cfg["fit_hi"])
    res = growth_experiment(params, cfg["steps"], cfg["seed"],
                            runs=cfg["runs"], threads=cfg["threads"],
                            fit_window=window)
    csv_rows = list(zip(res.m_grid, res.size_mean, res.size_q10,
                        res.size_q90))
    files = [write_csv(os.path.join(outdir, "growth.csv"),
                       GROWTH_HEADER, csv_rows)]
    fit = res.fit
    files.append(write_json(os.path.join(outdir, "growth_fit.json"), {
        **_fit_or_none(fit), "c1": res.c1, "c2": res.c2,
    }))
    ok = fit is not None and math.isfinite(fit.slope)
    if cfg["p"] == 1.0:
        ok = ok and 0.8 <= fit.slope <= 1.2 and res.c2 > 0.0
    if args.svg:
        ann = f"slope {fit.slope:.4f}, c1 {res.c1:.4f}, c2 {res.c2:.4f}"
        files.append(emit_svg(
            [(res.m_grid, res.size_mean), (res.m_grid, res.size_q10),
             (res.m_grid, res.size_q90)],
            ["mean size", "q10", "q90"],
            os.path.join(outdir, "plot.svg"),
            title="conditioned set growth", xlabel="window m",
            ylabel="|S_m|", loglog=True, annotation=ann))
    print(f"growth: {cfg['runs']} runs x {cfg['steps']} windows, "
          f"slope {fit.slope:.4f}, c1 {res.c1:.4f}, c2 {res.c2:.4f}")
    return files, ok


def _run_tail(cfg, args, outdir):
    params = _params(cfg, args)
    table = msd_experiment(params, [float(cfg["t"])], cfg["replicas"],
                           cfg["seed"], cfg["threads"], keep_raw=True)
    rows = tail_survival(table.raw_sq_graph[:, 0], cfg["levels"])
    csv_rows = [(L, ph, lo, hi, k, cfg["replicas"])
                for L, ph, lo, hi, k in rows]
    files = [write_csv(os.path.join(outdir, "tail.csv"),
                       TAIL_HEADER, csv_rows)]
    # exceedance of a diffusive walk: log P(dist >= L) ~ -c L^2 / t,
    # fitted on the levels that were actually reached
    pos = [(L, ph) for L, ph, *_ in rows if ph > 0.0]
    fit = None
    if len(pos) >= 2:
        fit = linear_fit([L * L / float(cfg["t"]) for L, _ in pos],
                         [math.log(ph) for _, ph in pos])
    fj = _fit_or_none(fit)
    fj["model"] = "log_survival ~ slope * level^2 / t"
    fj["levels_used"] = len(pos)
    files.append(write_json(os.path.join(outdir, "tail_fit.json"), fj))
    survs = [ph for _, ph, *_ in rows]
    ok = all(b <= a for a, b in zip(survs, survs[1:]))
    if cfg["p"] == 1.0 and fit is not None:
        ok = ok and fit.r2 > 0.95 and fit.slope < 0.0
    if args.svg:
        ann = None
        if fit is not None:
            ann = f"log-linear in L^2/t: R^2 {fit.r2:.4f}"
        files.append(emit_svg([([L for L, _ in pos], [ph for _, ph in pos])],
                              ["P(dist >= L)"],
                              os.path.join(outdir, "plot.svg"),
                              title=f"displacement tail at t={cfg['t']}",
                              xlabel="L", ylabel="survival",
                              loglog=True, annotation=ann))
    if args.dump_env:
        files.append(_dump_env(cfg, args, outdir, [float(cfg["t"])]))
    r2 = f"{fit.r2:.4f}" if fit is not None else "n/a"
    print(f"tail: {len(rows)} levels, {len(pos)} reached, "
          f"gaussian-tail R^2 {r2}")
    return files, ok


def _run_markov_type(cfg, args, outdir):
    params = _params(cfg, args)
    rows = markov_type_ratios(params, float(cfg["s"]), cfg["ks"],
                              cfg["replicas"], cfg["seed"],
                              cfg["threads"])
    csv_rows = [(k, float(cfg["s"]), k * float(cfg["s"]), r, lo, hi)
                for k, r, lo, hi in rows]
    files = [write_csv(os.path.join(outdir, "markov_type.csv"),
                       MARKOV_HEADER, csv_rows)]
    ok = all(r > 0.0 and hi <= 3.0 for _, r, _, hi in rows)
    if args.svg:
        ks = [k for k, *_ in rows]
        files.append(emit_svg(
            [(ks, [r for _, r, _, _ in rows]),
             (ks, [lo for *_, lo, _ in rows]),
             (ks, [hi for *_, hi in rows])],
            ["MSD(ks) / (k MSD(s))", "ci_lo", "ci_hi"],
            os.path.join(outdir, "plot.svg"),
            title="near-linear MSD growth", xlabel="k",
            ylabel="ratio"))
    if args.dump_env:
        cps = sorted({float(cfg["s"])} |
                     {float(k) * float(cfg["s"]) for k in cfg["ks"]})
        files.append(_dump_env(cfg, args, outdir, cps))
    worst = max((hi for *_, hi in rows), default=0.0)
    print(f"markov-type: {len(rows)} multipliers, max CI upper "
          f"{worst:.3f}")
    return files, ok


HANDLERS = {
    "msd": _run_msd,
    "sigma-sweep": _run_sigma_sweep,
    "onearm": _run_onearm,
    "hcluster": _run_hcluster,
    "theta": _run_theta,
    "evolving-check": _run_evolving_check,
    "df-check": _run_df_check,
    "growth": _run_growth,
    "tail": _run_tail,
    "markov-type": _run_markov_type,
}

HELP = {
    "msd": "mean squared displacement over a time grid",
    "sigma-sweep": "diffusivity across a refresh-rate grid",
    "onearm": "static one-arm probabilities over radii",
    "hcluster": "time-window cluster vs static percolation equivalence",
    "theta": "giant-cluster density on growing tori",
    "evolving-check": "drift and boundary inequalities on random instances",
    "df-check": "walker/set coupling estimator agreement",
    "growth": "conditioned evolving-set growth exponent",
    "tail": "displacement tail at a fixed time",
    "markov-type": "MSD ratio bounds at multiplied horizons",
}


def build_parser():
    ap = argparse.ArgumentParser(
        prog="dynperc",
        description="simulation and verification runs for random walk "
                    "on dynamical percolation")
    ap.add_argument("--version", action="version",
                    version=f"dynperc {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in HANDLERS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", metavar="FILE",
                        help="JSON config; unknown keys are rejected")
        sp.add_argument("--seed", type=int, help="master seed override")
        sp.add_argument("--threads", type=int, help="worker process count")
        sp.add_argument("--out", metavar="DIR",
                        help="output directory (beats DYNPERC_OUT and "
                             "the config value)")
        sp.add_argument("--check", action="store_true",
                        help="exit 3 unless the run's consistency check "
                             "passes")
        sp.add_argument("--svg", action="store_true",
                        help="also write plot.svg")
        sp.add_argument("--dump-env", dest="dump_env", action="store_true",
                        help="write sampled environment records for "
                             "replica 0 (walk-based runs)")
        sp.add_argument("--allow-large-mu", dest="allow_large_mu",
                        action="store_true",
                        help="lift the mu <= 1/e cap")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.subcommand, args.config,
                             {"seed": args.seed, "threads": args.threads})
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    outdir = resolve_out(cfg, args.out)
    os.makedirs(outdir, exist_ok=True)
    t0 = time.perf_counter()
    try:
        files, ok = HANDLERS[args.subcommand](cfg, args, outdir)
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    wall = time.perf_counter() - t0
    write_manifest(outdir, args.subcommand, cfg, wall, files, __version__)
    print(f"wrote {len(files) + 1} files to {outdir}")
    if args.check:
        print(f"check: {'PASS' if ok else 'FAIL'}")
        if not ok:
            return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
