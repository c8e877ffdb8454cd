"""Command-line interface.

Subcommands: run, sweep, verify, picard, kato-compare, report.
Exit codes: 0 success, 1 run/config/IO failure, 2 assert-class violation
(theorem probe or budget beyond tolerance). SQGEV_SWEEP_THREADS overrides the
sweep worker count.
"""

import argparse
import json
import os
import sys
from dataclasses import replace

from .analysis import pointwise_inequality_probe, product_ratio_probe
from .config import parse_config, parse_sweep
from .errors import InequalityViolated, SqgevError
from .initial_data import generate_initial_data
from .norms import GevreyParams
from .orchestrate import orchestrate, read_series, run_sweep
from .solver import bisect_contraction_horizon, kato_compare, picard_iterate


def _read_config(path):
    with open(path) as fh:
        return fh.read()


def _apply_seed(cfg, seed):
    if seed is None:
        return cfg
    return replace(cfg, init=replace(cfg.init, seed=seed))


def cmd_run(args):
    cfg = _apply_seed(parse_config(_read_config(args.config)), args.seed)
    return orchestrate(cfg, out_dir=args.out, quiet=args.quiet).exit_code


def cmd_sweep(args):
    configs, varied = parse_sweep(_read_config(args.config))
    if args.seed is not None:
        configs = [(_apply_seed(c, args.seed), ov) for c, ov in configs]
    out = args.out or "sweep_out"
    if not args.quiet:
        swept = ", ".join(f"{k}={v}" for k, v in varied.items()) or "nothing"
        print(f"sweep over {swept}: {len(configs)} runs -> {out}")
    return run_sweep(configs, out, quiet=args.quiet)


def cmd_verify(args):
    entries = []
    code = 0
    try:
        probe = pointwise_inequality_probe(args.samples, seed=args.seed)
        entries.extend(probe.to_json_entries())
        if not args.quiet:
            print(f"pointwise probe: {args.samples} samples, 0 violations, "
                  f"min slacks {probe.min_slack_power:.3e} / "
                  f"{probe.min_slack_exp:.3e}")
    except InequalityViolated as exc:
        code = 2
        entries.append({"inequality_id": "pointwise", "violations": 1,
                        "error": str(exc), "seed": args.seed})
        print(f"pointwise probe FAILED: {exc}", file=sys.stderr)
    p = GevreyParams(a=args.a, s=args.s, alpha=args.alpha)
    ratios = product_ratio_probe(args.trials, p, seed=args.seed)
    entries.extend(e.to_json_entry() for e in ratios.values())
    if not args.quiet:
        for key in sorted(ratios):
            print(f"ratio probe {key}: sup = {ratios[key].sup_ratio:.4f} "
                  f"({ratios[key].trials} trials)")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "verify.json"), "w") as fh:
            json.dump(entries, fh, indent=2, sort_keys=True)
    return code


def _solver_from_config(args):
    cfg = _apply_seed(parse_config(_read_config(args.config)), args.seed)
    theta0 = generate_initial_data(cfg.init, cfg.solver.grid)
    return cfg, theta0


def cmd_picard(args):
    cfg, theta0 = _solver_from_config(args)
    if args.horizon is not None:
        res = picard_iterate(theta0, cfg.solver, args.horizon, args.iters)
        horizon = res.horizon
    else:
        # bounded by the experiment's own horizon: sweep cost and memory
        # scale with horizon/dt
        horizon, res = bisect_contraction_horizon(theta0, cfg.solver,
                                                  n_iter=args.iters,
                                                  t_cap=cfg.solver.t_end)
    if not args.quiet:
        print(f"horizon = {horizon:.6g}")
        for m, d in enumerate(res.distances):
            print(f"  d_{m} = {d:.6e}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "picard.csv"), "w") as fh:
            fh.write("m,distance\n")
            fh.writelines(f"{m},{d!r}\n" for m, d in enumerate(res.distances))
        with open(os.path.join(args.out, "picard.json"), "w") as fh:
            json.dump({"horizon": horizon, "distances": res.distances},
                      fh, indent=2)
        if args.figures:
            from .figures import plot_picard

            plot_picard(res.distances, os.path.join(args.out, "picard.png"))
    return 0


def cmd_kato(args):
    cfg, theta0 = _solver_from_config(args)
    ks = [int(v) for v in args.ks.split(",") if v.strip()]
    table = kato_compare(theta0, cfg.solver, ks)
    if not args.quiet:
        for k, dev in table:
            print(f"  k = {k:>8d}: sup_t deviation = {dev:.6e}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "kato.csv"), "w") as fh:
            fh.write("k,deviation\n")
            fh.writelines(f"{k},{d!r}\n" for k, d in table)
        with open(os.path.join(args.out, "kato.json"), "w") as fh:
            json.dump({"table": table}, fh, indent=2)
        if args.figures:
            from .figures import plot_kato

            plot_kato(table, os.path.join(args.out, "kato.png"))
    return 0


def cmd_report(args):
    from .figures import plot_comparison, plot_series

    run_dirs = []
    for d in args.runs:
        if os.path.isfile(os.path.join(d, "series.csv")):
            run_dirs.append(d)
        else:
            run_dirs.extend(
                os.path.join(d, sub) for sub in sorted(os.listdir(d))
                if os.path.isfile(os.path.join(d, sub, "series.csv")))
    if not run_dirs:
        print("no series.csv found under the given directories",
              file=sys.stderr)
        return 1
    out = args.out or "report_out"
    os.makedirs(out, exist_ok=True)
    rows = []
    labeled = []
    for d in run_dirs:
        cols = read_series(os.path.join(d, "series.csv"))
        label = os.path.basename(os.path.normpath(d))
        labeled.append((label, cols))
        final = {name: cols[name][-1] for name in cols}
        crossing = None
        if args.eps is not None:
            below = cols["t"][cols["hs_gevrey"] < args.eps]
            crossing = float(below[0]) if below.size else None
        rows.append({"run": label, "t_final": float(cols["t"][-1]),
                     "final_hs_gevrey": float(final["hs_gevrey"]),
                     "max_budget_residual":
                         float(max(abs(cols["budget_residual"]))),
                     "decay_crossing": crossing})
        plot_series(os.path.join(d, "series.csv"),
                    os.path.join(out, f"{label}_series.png"), title=label)
    lines = ["run,t_final,final_hs_gevrey,max_budget_residual,decay_crossing"]
    for r in rows:
        lines.append(",".join([
            r["run"], repr(r["t_final"]), repr(r["final_hs_gevrey"]),
            repr(r["max_budget_residual"]),
            "" if r["decay_crossing"] is None else repr(r["decay_crossing"])]))
    with open(os.path.join(out, "report.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump({"runs": rows}, fh, indent=2, sort_keys=True)
    if len(labeled) > 1:
        plot_comparison(labeled, os.path.join(out, "comparison.png"))
    if not args.quiet:
        print(f"report for {len(rows)} run(s) -> {out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sqgev",
        description="Pseudo-spectral quasi-geostrophic runs and diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="experiment document")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override init.seed")
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("run", help="run a single experiment")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="cross-product sweep of list-valued keys")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="inequality lab (probes only)")
    common(p, config=False)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--s", type=float, default=2.5)
    p.add_argument("--alpha", type=float, default=0.25)
    p.set_defaults(func=cmd_verify, seed=0)

    p = sub.add_parser("picard", help="mild-solution fixed-point sweeps")
    common(p)
    p.add_argument("--horizon", type=float, default=None,
                   help="fixed horizon (bisected when omitted)")
    p.add_argument("--iters", type=int, default=7)
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=cmd_picard)

    p = sub.add_parser("kato-compare", help="regularized-family convergence")
    common(p)
    p.add_argument("--ks", default="10,100,1000")
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=cmd_kato)

    p = sub.add_parser("report", help="re-summarize existing run CSVs")
    p.add_argument("--runs", nargs="+", required=True,
                   help="run directories or a sweep root")
    p.add_argument("--out", default=None)
    p.add_argument("--eps", type=float, default=None,
                   help="decay threshold for crossing times")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SqgevError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
