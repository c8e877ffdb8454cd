"""Run orchestration: wire config -> initial data -> solver -> monitors, and
persist series CSV, summary JSON, and probe reports.

Exit-status contract: theorem-level probe violations and budget residuals
beyond tolerance yield status 2 (assert-class); estimation probes never
affect status; run/config/IO failures surface as exceptions for the CLI to
map to status 1. The summary is written last so a failed run leaves no
partial summary behind.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import (BlowupEnvelope, RunReport, bkm_integral, decay_report,
                       energy_inequality_audit, no_blowup_before,
                       pointwise_inequality_probe, product_ratio_probe,
                       small_data_check)
from .config import emit_config
from .errors import InequalityViolated
from .initial_data import generate_initial_data
from .solver import existence_time_estimate, run

SERIES_MAGIC = "# sqgev series v1"
SERIES_COLUMNS = ("t", "l2", "hs", "hs_gevrey", "dissipation_integral",
                  "budget_residual", "x1_weighted")

THREADS_ENV = "SQGEV_SWEEP_THREADS"


def write_series(path, ledger, indices):
    """Frozen, versioned CSV layout; one row per report time."""
    lines = [SERIES_MAGIC, ",".join(SERIES_COLUMNS)]
    for i in indices:
        row = (ledger.times[i], ledger.l2[i], ledger.hs[i], ledger.hs_gevrey[i],
               ledger.diss_accum[i], ledger.budget_residual[i],
               ledger.x1_weighted[i])
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_series(path):
    """Column name -> float array for a series CSV."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.size == 0:
        data = data.reshape(0, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


@dataclass(frozen=True)
class OrchestrateResult:
    exit_code: int
    report: RunReport
    out_dir: str
    failures: tuple = ()


def build_report(ledger, reports, cfg, theta0):
    """Assemble the RunReport from a completed ledger."""
    mon = cfg.monitors
    p = cfg.solver.params
    decay = (decay_report(ledger, mon.decay_eps)
             if mon.decay_eps is not None else None)
    small = existence = None
    if mon.c_cal is not None:
        small = small_data_check(theta0, p, mon.c_cal)
        if theta0.l2_norm() > 0:
            existence = existence_time_estimate(theta0, p, mon.c_cal)
    t_safe = None
    if mon.envelope_c1 is not None:
        env = BlowupEnvelope(c1=mon.envelope_c1, c2=mon.envelope_c2,
                             a=p.a, alpha=p.alpha, s=p.s)
        t_safe = no_blowup_before(ledger, env)
    return RunReport(
        t_final=ledger.times[-1],
        initial=reports[0][1],
        final=reports[-1][1],
        max_budget_residual=max(abs(b) for b in ledger.budget_residual),
        energy_violation=energy_inequality_audit(ledger),
        decay=decay,
        bkm=bkm_integral(ledger),
        small_data=small,
        existence_time=existence,
        no_blowup_before_time=t_safe,
    )


def orchestrate(cfg, out_dir=None, quiet=False):
    """Run one experiment and write its artifacts under out_dir."""
    out = out_dir if out_dir is not None else cfg.output.directory
    os.makedirs(out, exist_ok=True)

    theta0 = generate_initial_data(cfg.init, cfg.solver.grid)
    result = run(theta0, cfg.solver)
    ledger = result.state.ledger
    report = build_report(ledger, result.reports, cfg, theta0)

    failures = []
    if report.max_budget_residual > cfg.monitors.budget_tol:
        failures.append(
            f"budget residual {report.max_budget_residual:.3e} exceeds "
            f"tolerance {cfg.monitors.budget_tol:.3e}")

    probe_entries = []
    if cfg.monitors.pointwise_samples is not None:
        try:
            probe = pointwise_inequality_probe(cfg.monitors.pointwise_samples,
                                               seed=cfg.init.seed)
            probe_entries.extend(probe.to_json_entries())
        except InequalityViolated as exc:
            failures.append(f"pointwise probe: {exc}")
    if cfg.monitors.product_trials is not None:
        ratios = product_ratio_probe(cfg.monitors.product_trials,
                                     cfg.solver.params, seed=cfg.init.seed)
        probe_entries.extend(e.to_json_entry() for e in ratios.values())

    with open(os.path.join(out, "config.txt"), "w") as fh:
        fh.write(emit_config(cfg))
    if cfg.output.csv:
        write_series(os.path.join(out, "series.csv"), ledger,
                     result.report_indices)
    if probe_entries:
        with open(os.path.join(out, "probes.json"), "w") as fh:
            json.dump(probe_entries, fh, indent=2, sort_keys=True)
    if cfg.output.figures:
        from .figures import plot_series

        plot_series(os.path.join(out, "series.csv"),
                    os.path.join(out, "series.png"))

    exit_code = 2 if failures else 0
    if cfg.output.json:
        summary = {
            "config": emit_config(cfg),
            "dt": cfg.solver.effective_dt,
            "steps": len(ledger) - 1,
            "report": report.to_dict(),
            "assert_failures": failures,
            "exit_code": exit_code,
        }
        with open(os.path.join(out, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)

    if not quiet:
        status = "FAIL" if failures else "ok"
        print(f"[{status}] {out}: t_end={report.t_final:.6g} "
              f"hs_gevrey {report.initial.hs_gevrey:.6g} -> "
              f"{report.final.hs_gevrey:.6g}, "
              f"max budget residual {report.max_budget_residual:.3e}")
        for f in failures:
            print(f"  assert-class failure: {f}")
    return OrchestrateResult(exit_code=exit_code, report=report, out_dir=out,
                             failures=tuple(failures))


def sweep_workers():
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            print(f"ignoring non-integer {THREADS_ENV}={env!r}")
    return 1


def run_sweep(configs, out_root, quiet=False):
    """Run expanded sweep members into per-run directories, then write the
    comparative summary (only after all members complete).

    configs: list of (ExperimentConfig, overrides) from parse_sweep.
    """
    os.makedirs(out_root, exist_ok=True)
    dirs = [os.path.join(out_root, f"run_{i:03d}") for i in range(len(configs))]

    def member(i):
        return orchestrate(configs[i][0], dirs[i], quiet=quiet)

    workers = sweep_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(member, range(len(configs))))
    else:
        results = [member(i) for i in range(len(configs))]

    rows = []
    for (cfg, overrides), res, d in zip(configs, results, dirs):
        r = res.report
        rows.append({
            "dir": os.path.basename(d),
            "overrides": overrides,
            "exit_code": res.exit_code,
            "final_hs_gevrey": r.final.hs_gevrey,
            "max_budget_residual": r.max_budget_residual,
            "energy_violation": r.energy_violation,
            "decay_crossing": r.decay.crossing_time if r.decay else None,
        })
    with open(os.path.join(out_root, "sweep_summary.json"), "w") as fh:
        json.dump({"runs": rows}, fh, indent=2, sort_keys=True)
    keys = sorted({k for row in rows for k in row["overrides"]})
    lines = ["dir," + ",".join(keys)
             + ",exit_code,final_hs_gevrey,max_budget_residual"]
    for row in rows:
        vals = [str(row["overrides"].get(k, "")) for k in keys]
        lines.append(",".join([row["dir"]] + vals
                              + [str(row["exit_code"]),
                                 repr(row["final_hs_gevrey"]),
                                 repr(row["max_budget_residual"])]))
    with open(os.path.join(out_root, "sweep_summary.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return max((res.exit_code for res in results), default=0)
