"""Experiment configuration: a flat dotted-key document, one per experiment.

Grammar: one ``key = value`` per line; blank lines and ``#`` comments are
ignored. Values are ints, floats, ``true``/``false``, bare strings, or (for
sweeps only) bracketed lists ``[v1, v2, ...]`` that expand as a cross
product over keys. Unknown keys are rejected. ``emit_config`` writes the
canonical form (fixed key order, repr floats), and parse(emit(cfg)) == cfg
with byte-identical re-emission.
"""

import itertools
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .initial_data import KINDS, InitialDataSpec
from .norms import GevreyParams
from .solver import SolverConfig
from .spectral import GridSpec


@dataclass(frozen=True)
class MonitorConfig:
    budget_tol: float = 1e-6
    decay_eps: float | None = None
    c_cal: float | None = None
    envelope_c1: float | None = None
    envelope_c2: float | None = None
    pointwise_samples: int | None = None
    product_trials: int | None = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "runs"
    csv: bool = True
    json: bool = True
    figures: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    solver: SolverConfig
    init: InitialDataSpec
    monitors: MonitorConfig
    output: OutputConfig


# key -> (required, type tag, default). Order is the canonical emission order.
_SCHEMA = {
    "grid.n": (True, "int", None),
    "params.a": (True, "float", None),
    "params.s": (True, "float", None),
    "params.alpha": (True, "float", None),
    "solver.kappa": (False, "float", 1.0),
    "solver.dt": (False, "float", None),
    "solver.cfl": (False, "float", 1.0),
    "solver.t_end": (True, "float", None),
    "solver.kato_k": (False, "int", None),
    "solver.output_stride": (False, "int", 1),
    "init.kind": (True, "str", None),
    "init.amplitude": (False, "float", 1.0),
    "init.band_lo": (False, "int", 1),
    "init.band_hi": (False, "int", 4),
    "init.mode_k1": (False, "int", 1),
    "init.mode_k2": (False, "int", 0),
    "init.seed": (False, "int", 0),
    "monitors.budget.tol": (False, "float", 1e-6),
    "monitors.decay.eps": (False, "float", None),
    "monitors.smalldata.c_cal": (False, "float", None),
    "monitors.envelope.c1": (False, "float", None),
    "monitors.envelope.c2": (False, "float", None),
    "monitors.pointwise.samples": (False, "int", None),
    "monitors.product.trials": (False, "int", None),
    "output.dir": (False, "str", "runs"),
    "output.csv": (False, "bool", True),
    "output.json": (False, "bool", True),
    "output.figures": (False, "bool", False),
}


def _parse_scalar(token, tag, key, line):
    token = token.strip()
    try:
        if tag == "int":
            return int(token)
        if tag == "float":
            return float(token)
        if tag == "bool":
            if token in ("true", "false"):
                return token == "true"
            raise ValueError(f"expected true/false, got {token!r}")
        return token
    except ValueError as exc:
        raise ParseError(f"{key}: {exc}", line=line) from None


def _parse_document(text):
    """Raw key -> (value or list, line) map with schema typing applied."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", line=lineno)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _SCHEMA:
            raise ParseError(f"unknown key {key!r}", line=lineno)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        tag = _SCHEMA[key][1]
        if val.startswith("[") and val.endswith("]"):
            items = [v for v in val[1:-1].split(",") if v.strip()]
            if not items:
                raise ParseError(f"{key}: empty sweep list", line=lineno)
            out[key] = ([_parse_scalar(v, tag, key, lineno) for v in items], lineno)
        else:
            out[key] = (_parse_scalar(val, tag, key, lineno), lineno)
    return out


def _build(values):
    def get(key):
        return values.get(key, _SCHEMA[key][2])

    for key, (required, _, _) in _SCHEMA.items():
        if required and key not in values:
            raise ValidationError(key, "required key missing")

    n = get("grid.n")
    if n < 8 or n % 2 != 0:
        raise ValidationError("grid.n", "must be an even integer >= 8")
    grid = GridSpec(n)

    a, s, alpha = get("params.a"), get("params.s"), get("params.alpha")
    if not a > 0:
        raise ValidationError("params.a", "must be > 0")
    if not s > 2:
        raise ValidationError("params.s", "must be > 2")
    if not 0 < alpha <= 0.5:
        raise ValidationError(
            "params.alpha", "must be in (0, 1/2) (the critical endpoint 0.5 "
            "is admitted for linear-sector checks)")
    params = GevreyParams(a=a, s=s, alpha=alpha)

    for key, cond in (("solver.kappa", get("solver.kappa") > 0),
                      ("solver.cfl", get("solver.cfl") > 0),
                      ("solver.t_end", get("solver.t_end") >= 0),
                      ("solver.output_stride", get("solver.output_stride") >= 1)):
        if not cond:
            raise ValidationError(key, "out of range")
    if get("solver.dt") is not None and not get("solver.dt") > 0:
        raise ValidationError("solver.dt", "must be > 0")
    if get("solver.kato_k") is not None and get("solver.kato_k") < 1:
        raise ValidationError("solver.kato_k", "must be >= 1")
    solver = SolverConfig(grid=grid, params=params, kappa=get("solver.kappa"),
                          dt=get("solver.dt"), t_end=get("solver.t_end"),
                          kato_k=get("solver.kato_k"),
                          output_stride=get("solver.output_stride"),
                          cfl=get("solver.cfl"))

    kind = get("init.kind")
    if kind not in KINDS:
        raise ValidationError("init.kind", f"must be one of {KINDS}")
    lo, hi = get("init.band_lo"), get("init.band_hi")
    cut = grid.dealias_cutoff
    if kind in ("x1_profile", "random_band", "two_mode"):
        if not 1 <= lo <= hi:
            raise ValidationError("init.band_lo", "must satisfy 1 <= lo <= hi")
        if hi > cut:
            raise ValidationError(
                "init.band_hi", f"band must stay in the dealiased region (<= {cut})")
    m1, m2 = get("init.mode_k1"), get("init.mode_k2")
    if kind == "single_mode":
        if (m1, m2) == (0, 0) or max(abs(m1), abs(m2)) > cut:
            raise ValidationError(
                "init.mode_k1", f"mode must be nonzero with |k_i| <= {cut}")
    init = InitialDataSpec(kind=kind, amplitude=get("init.amplitude"),
                           band=(lo, hi), mode=(m1, m2), seed=get("init.seed"))

    for key in ("monitors.budget.tol", "monitors.decay.eps",
                "monitors.smalldata.c_cal", "monitors.envelope.c1",
                "monitors.envelope.c2"):
        v = get(key)
        if v is not None and not v > 0:
            raise ValidationError(key, "must be > 0")
    for key in ("monitors.pointwise.samples", "monitors.product.trials"):
        v = get(key)
        if v is not None and v < 1:
            raise ValidationError(key, "must be >= 1")
    c1, c2 = get("monitors.envelope.c1"), get("monitors.envelope.c2")
    if (c1 is None) != (c2 is None):
        raise ValidationError("monitors.envelope.c1",
                              "c1 and c2 must be set together")
    monitors = MonitorConfig(budget_tol=get("monitors.budget.tol"),
                             decay_eps=get("monitors.decay.eps"),
                             c_cal=get("monitors.smalldata.c_cal"),
                             envelope_c1=c1, envelope_c2=c2,
                             pointwise_samples=get("monitors.pointwise.samples"),
                             product_trials=get("monitors.product.trials"))

    output = OutputConfig(directory=get("output.dir"), csv=get("output.csv"),
                          json=get("output.json"), figures=get("output.figures"))
    return ExperimentConfig(solver=solver, init=init, monitors=monitors,
                            output=output)


def parse_config(text):
    """Parse a single-experiment document (sweep lists rejected)."""
    raw = _parse_document(text)
    for key, (val, line) in raw.items():
        if isinstance(val, list):
            raise ParseError(f"{key}: sweep lists are only valid in 'sweep' "
                             "documents", line=line)
    return _build({k: v for k, (v, _) in raw.items()})


def parse_sweep(text):
    """Expand list-valued keys as a cross product, in canonical key order.

    Returns (configs, varied) where varied maps each swept key to its values.
    """
    raw = _parse_document(text)
    scalars = {k: v for k, (v, _) in raw.items() if not isinstance(v, list)}
    listed = {k: v for k, (v, _) in raw.items() if isinstance(v, list)}
    varied = {k: listed[k] for k in _SCHEMA if k in listed}
    combos = itertools.product(*(varied[k] for k in varied))
    configs = []
    for combo in combos:
        values = dict(scalars)
        overrides = dict(zip(varied.keys(), combo))
        values.update(overrides)
        configs.append((_build(values), overrides))
    return configs, varied


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_values(cfg):
    """Flat key -> value map of a config (optionals included only when set)."""
    sv, init, mon, out = cfg.solver, cfg.init, cfg.monitors, cfg.output
    vals = {
        "grid.n": sv.grid.n,
        "params.a": sv.params.a,
        "params.s": sv.params.s,
        "params.alpha": sv.params.alpha,
        "solver.kappa": sv.kappa,
        "solver.dt": sv.dt,
        "solver.cfl": sv.cfl,
        "solver.t_end": sv.t_end,
        "solver.kato_k": sv.kato_k,
        "solver.output_stride": sv.output_stride,
        "init.kind": init.kind,
        "init.amplitude": init.amplitude,
        "init.band_lo": init.band[0],
        "init.band_hi": init.band[1],
        "init.mode_k1": init.mode[0],
        "init.mode_k2": init.mode[1],
        "init.seed": init.seed,
        "monitors.budget.tol": mon.budget_tol,
        "monitors.decay.eps": mon.decay_eps,
        "monitors.smalldata.c_cal": mon.c_cal,
        "monitors.envelope.c1": mon.envelope_c1,
        "monitors.envelope.c2": mon.envelope_c2,
        "monitors.pointwise.samples": mon.pointwise_samples,
        "monitors.product.trials": mon.product_trials,
        "output.dir": out.directory,
        "output.csv": out.csv,
        "output.json": out.json,
        "output.figures": out.figures,
    }
    return {k: v for k, v in vals.items() if v is not None}


def emit_config(cfg):
    """Canonical document: fixed key order, one key per line."""
    vals = config_values(cfg)
    lines = [f"{key} = {_format_value(vals[key])}" for key in _SCHEMA if key in vals]
    return "\n".join(lines) + "\n"
