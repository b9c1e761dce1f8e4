"""Batch command-line front end.

Subcommands expose the analyzer (identity suites, sign certificates,
threshold search) and the axisymmetric flow as reproducible commands that
emit canonical JSON reports and CSV traces.  Exit codes: 0 success,
1 property violation, 2 configuration error, 3 numerical failure
(convexity loss or an inconclusive certificate).
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import flow as flowmod
from . import identities, reports
from .certificates import certify_nonpositive, find_threshold
from .errors import (
    BracketError,
    ConfigError,
    ConvexityLossError,
    DomainError,
    ResolutionError,
    VerdictConflictError,
)
from .speeds import FAMILIES, set_derivative_corruption

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

MONOTONE_TOL = 1e-3

_FLOW_FIELDS = {
    "family": str,
    "alpha": float,
    "a": float,
    "b": float,
    "n_nodes": int,
    "safety": float,
    "stop_fraction": float,
    "max_steps": int,
    "record_every": int,
}


def _load_config_file(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ConfigError(f"field 'config': cannot read {path!r} ({err})")
    except json.JSONDecodeError as err:
        raise ConfigError(f"field 'config': {path!r} is not valid JSON ({err})")
    if not isinstance(doc, dict):
        raise ConfigError("field 'config': document must be a JSON object")
    return doc


def _merge(args, fields, extra_ok=()):
    """defaults < config file < explicit flags, with unknown-key rejection."""
    merged = {}
    if getattr(args, "config", None):
        doc = _load_config_file(args.config)
        for key, value in doc.items():
            if key not in fields and key not in extra_ok:
                raise ConfigError(f"field {key!r}: not recognized by this command")
            merged[key] = value
    for key in fields:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    return merged


def _coerce(merged, types):
    for key, value in merged.items():
        if key in types and value is not None:
            try:
                merged[key] = types[key](value)
            except (TypeError, ValueError):
                raise ConfigError(f"field {key!r}: cannot convert {value!r}")
    return merged


def _require(merged, key):
    if merged.get(key) is None:
        raise ConfigError(f"field {key!r}: required")
    return merged[key]


def _check_family(name):
    if name not in FAMILIES:
        raise ConfigError(
            f"field 'family': {name!r} not one of {', '.join(FAMILIES)}"
        )
    return name


def _ensure_out(out):
    if out:
        os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# verify-identities


def cmd_verify_identities(args):
    merged = _coerce(
        _merge(args, ("draws", "seed")), {"draws": int, "seed": int}
    )
    draws = merged.get("draws", 10000)
    seed = merged.get("seed", 0)
    if draws <= 0:
        raise ConfigError("field 'draws': must be positive")
    out = _ensure_out(args.out)
    set_derivative_corruption(args.corrupt)
    try:
        result = identities.run_all(draws=draws, seed=seed)
    finally:
        set_derivative_corruption(None)
    for suite in result["suites"]:
        worst = suite.get("worst_ratio", suite.get("worst_rel"))
        status = "ok" if suite["pass"] else "EXCEEDED"
        print(
            f"{suite['suite']}: worst {worst:.3e}  bound {suite['bound']:.0e}  {status}"
        )
    if out:
        reports.write_report(os.path.join(out, "identities.json"), result)
    return EXIT_OK if result["pass"] else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# q-sign


def cmd_q_sign(args):
    merged = _coerce(
        _merge(args, ("family", "alpha", "t_max", "depth_limit")),
        {"family": str, "alpha": float, "t_max": float, "depth_limit": int},
    )
    family = _check_family(_require(merged, "family"))
    alpha = _require(merged, "alpha")
    if not alpha > 0:
        raise ConfigError("field 'alpha': must be positive")
    t_max = merged.get("t_max", 1e6)
    depth_limit = merged.get("depth_limit", 60)
    report = certify_nonpositive(
        family, alpha=alpha, t_max=t_max, depth_limit=depth_limit
    )
    line = f"{family} alpha={alpha:g}: {report.verdict}"
    if report.verdict == "violated":
        line += f"  witness t={report.witness_t:.6g} q={report.witness_q:.3e}"
    print(line)
    out = _ensure_out(args.out)
    if out:
        reports.write_report(os.path.join(out, "qsign.json"), report)
    if report.verdict == "violated":
        return EXIT_VIOLATION
    if report.verdict == "inconclusive":
        return EXIT_NUMERIC
    return EXIT_OK


# ---------------------------------------------------------------------------
# threshold


def cmd_threshold(args):
    merged = _coerce(
        _merge(args, ("family", "alpha_lo", "alpha_hi", "tol", "t_max")),
        {
            "family": str,
            "alpha_lo": float,
            "alpha_hi": float,
            "tol": float,
            "t_max": float,
        },
    )
    family = _check_family(_require(merged, "family"))
    lo = _require(merged, "alpha_lo")
    hi = _require(merged, "alpha_hi")
    tol = merged.get("tol", 0.05)
    t_max = merged.get("t_max", 1e6)
    if not 0 < lo < hi:
        raise ConfigError("field 'alpha_lo': need 0 < alpha_lo < alpha_hi")
    if not tol > 0:
        raise ConfigError("field 'tol': must be positive")
    result = find_threshold(family, (lo, hi), tol, t_max=t_max)
    mid = 0.5 * (result.alpha_lo + result.alpha_hi)
    print(
        f"{family}: threshold in [{result.alpha_lo:.6g}, {result.alpha_hi:.6g}]"
        f"  midpoint {mid:.6g}  width {result.width:.3g}"
    )
    out = _ensure_out(args.out)
    if out:
        reports.write_report(os.path.join(out, "threshold.json"), result)
    return EXIT_OK


# ---------------------------------------------------------------------------
# flow


def _flow_config(merged):
    kwargs = {k: v for k, v in merged.items() if v is not None}
    _check_family(_require(kwargs, "family"))
    _require(kwargs, "alpha")
    try:
        return flowmod.FlowConfig(**kwargs)
    except (ValueError, TypeError) as err:
        raise ConfigError(str(err))


def _flow_summary(trace):
    summary = trace.summary_dict()
    drifts = {}
    for col in ("pinch_sup", "max_radius", "max_ratio"):
        values = [getattr(r, col) for r in trace.records]
        drifts[col] = flowmod.pinching_drift(values) if values else None
    summary["monotonicity"] = {
        "drift": drifts,
        "monotone": {
            c: (d is not None and d <= MONOTONE_TOL) for c, d in drifts.items()
        },
        "tolerance": MONOTONE_TOL,
    }
    cfg = trace.config
    if cfg.a == cfg.b:
        summary["sphere_t_exact"] = flowmod.sphere_extinction_time(
            cfg.a, cfg.alpha
        )
    return summary


def _write_flow_outputs(out, trace, summary):
    reports.write_trace_csv(
        os.path.join(out, "trace.csv"),
        flowmod.TRACE_COLUMNS,
        [r.row() for r in trace.records],
    )
    reports.write_report(os.path.join(out, "summary.json"), summary)


def _run_flow(config, out):
    try:
        trace = flowmod.run(config)
        code = EXIT_OK
    except ConvexityLossError as err:
        trace = err.trace
        code = EXIT_NUMERIC
    summary = _flow_summary(trace)
    if out:
        _write_flow_outputs(out, trace, summary)
    return code, summary


def cmd_flow(args):
    merged = _coerce(_merge(args, tuple(_FLOW_FIELDS)), _FLOW_FIELDS)
    config = _flow_config(merged)
    out = _ensure_out(args.out)
    code, summary = _run_flow(config, out)
    mono = summary["monotonicity"]["monotone"]
    print(
        f"{config.family} alpha={config.alpha:g} a={config.a:g} b={config.b:g}:"
        f" status={summary['status']} steps={summary['steps']}"
    )
    if summary["t_extinct"] is not None:
        print(f"  extinction estimate T={summary['t_extinct']:.9g}")
    if summary["deviation"] is not None:
        print(f"  rescaled deviation {summary['deviation']:.3e}")
    print(
        "  monotone: "
        + "  ".join(f"{k}={'yes' if v else 'NO'}" for k, v in mono.items())
    )
    return code


# ---------------------------------------------------------------------------
# sweep


def _expand_sweep(doc):
    base = doc.get("base", {})
    if not isinstance(base, dict):
        raise ConfigError("field 'base': must be a JSON object")
    if ("runs" in doc) == ("sweep" in doc):
        raise ConfigError("field 'runs': provide exactly one of 'runs' or 'sweep'")
    runs = []
    if "runs" in doc:
        if not isinstance(doc["runs"], list):
            raise ConfigError("field 'runs': must be a list of run objects")
        for i, entry in enumerate(doc["runs"]):
            if not isinstance(entry, dict):
                raise ConfigError(f"field 'runs[{i}]': must be a JSON object")
            runs.append({**base, **entry})
    else:
        axes = doc["sweep"]
        if not isinstance(axes, dict) or not axes:
            raise ConfigError("field 'sweep': must be a non-empty JSON object")
        keys = sorted(axes)
        for key in keys:
            if not isinstance(axes[key], list) or not axes[key]:
                raise ConfigError(f"field 'sweep.{key}': must be a non-empty list")
        combos = [{}]
        for key in keys:
            combos = [{**c, key: v} for c in combos for v in axes[key]]
        runs = [{**base, **combo} for combo in combos]
    for entry in runs:
        for key in entry:
            if key not in _FLOW_FIELDS:
                raise ConfigError(f"field {key!r}: not a flow parameter")
    return runs


def _sweep_worker(item):
    index, cfg_kwargs, out = item
    config = flowmod.FlowConfig(**cfg_kwargs)
    run_dir = None
    if out:
        run_dir = os.path.join(out, f"run_{index:03d}")
        os.makedirs(run_dir, exist_ok=True)
    code, summary = _run_flow(config, run_dir)
    return index, code, summary


def cmd_sweep(args):
    if not args.config:
        raise ConfigError("field 'config': sweep requires --config")
    doc = _load_config_file(args.config)
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    if workers < 1:
        raise ConfigError("field 'workers': must be >= 1")
    run_dicts = _expand_sweep(doc)
    configs = []
    for entry in run_dicts:
        merged = _coerce(dict(entry), _FLOW_FIELDS)
        configs.append(_flow_config(merged))
    out = _ensure_out(args.out)
    items = [
        (
            i,
            {k: getattr(c, k) for k in _FLOW_FIELDS},
            out,
        )
        for i, c in enumerate(configs)
    ]
    if workers == 1 or len(items) == 1:
        results = [_sweep_worker(item) for item in items]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, items))
    results.sort(key=lambda r: r[0])
    # worker count deliberately left out: reports must not depend on it
    combined = {
        "runs": [summary for _, _, summary in results],
        "exit_codes": [code for _, code, _ in results],
    }
    for index, code, summary in results:
        cfg = summary["config"]
        print(
            f"run {index:03d}: {cfg['family']} alpha={cfg['alpha']:g}"
            f" a={cfg['a']:g} b={cfg['b']:g} status={summary['status']}"
            f" exit={code}"
        )
    if out:
        reports.write_report(os.path.join(out, "sweep.json"), combined)
    return max(combined["exit_codes"], default=EXIT_OK)


# ---------------------------------------------------------------------------
# parser


def _add_common(sub):
    sub.add_argument("--config", help="JSON file supplying any of this command's fields")
    sub.add_argument("--out", help="directory for report files")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pinchflow",
        description="sign certificates and axisymmetric flows for homogeneous curvature speeds",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser(
        "verify-identities", help="randomized identity suites (status 1 on any exceed)"
    )
    p.add_argument("--draws", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--corrupt", choices=("fdot", "fddot"), help=argparse.SUPPRESS)
    _add_common(p)
    p.set_defaults(func=cmd_verify_identities)

    p = subs.add_parser("q-sign", help="certify Q1, Q2 <= 0 over the ratio ray")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--depth-limit", dest="depth_limit", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_q_sign)

    p = subs.add_parser("threshold", help="bisect the largest certifiable exponent")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--alpha-lo", dest="alpha_lo", type=float)
    p.add_argument("--alpha-hi", dest="alpha_hi", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_threshold)

    p = subs.add_parser("flow", help="integrate the axisymmetric support-function flow")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--n-nodes", dest="n_nodes", type=int)
    p.add_argument("--safety", type=float)
    p.add_argument("--stop-fraction", dest="stop_fraction", type=float)
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--record-every", dest="record_every", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_flow)

    p = subs.add_parser("sweep", help="run a batch of flows on a worker pool")
    p.add_argument("--workers", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except BracketError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ResolutionError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except VerdictConflictError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
