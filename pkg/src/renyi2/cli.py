"""Command-line interface.

Usage::

    renyi2 minh2 channel.json
    renyi2 conditions channel.json
    renyi2 additivity first.json second.json --restarts 32
    renyi2 wh-region 10 --step 0.01 --out region.csv
    renyi2 wh-export -0.2 0.3 3 --out wh.json
    renyi2 extremal 3

Reports are JSON (keys in a fixed order, floats with 17 significant digits)
or two-column ``key,value`` CSV with ``--format csv``.  Failures print a
single JSON line ``{"error": ..., "message": ...}`` to stderr and exit 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, linalg
from .channel import (
    QuantumChannel,
    channel_to_dict,
    choi_of,
    load_channel,
)
from .optimize import DEFAULT_RESTARTS, DEFAULT_TOL, additivity_gap, max_output_purity
from .replica import theorem2_conditions
from .werner_holevo import (
    WHParams,
    extremal_choi,
    realignment_entanglement_check,
    region_scan,
    wh_channel,
    wh_is_cp,
)

REGION_COLUMNS = ("a", "b", "d", "is_cp", "is_ppt", "cond_h", "cond_hF", "boundary_flag")


class CLIError(Exception):
    pass


# ---------------------------------------------------------------- serialization


def _plain(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    return obj


def _encode(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        return format(obj, ".17g")
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, list):
        if all(not isinstance(x, (dict, list)) for x in obj):
            return "[" + ", ".join(_encode(x, indent + 1) for x in obj) + "]"
        items = [pad + _encode(x, indent + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    return json.dumps(obj)


def dumps_report(report: dict) -> str:
    """Deterministic JSON text of a report (17 significant digits per float)."""
    return _encode(_plain(report)) + "\n"


def report_to_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in _plain(report).items():
        if isinstance(value, float):
            value = format(value, ".17g")
        elif isinstance(value, (list, dict)):
            value = _encode(value).replace("\n", "").replace("  ", "")
        elif isinstance(value, bool) or value is None:
            value = json.dumps(value)
        writer.writerow([key, value])
    return buf.getvalue()


def _state_pairs(phi: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in phi]


# ---------------------------------------------------------------- commands


def _load(path: str) -> QuantumChannel:
    if not Path(path).is_file():
        raise CLIError(f"channel file not found: {path}")
    return load_channel(path)


def cmd_minh2(channel_file: str, seed: int = 0, restarts: int = DEFAULT_RESTARTS,
              tol: float = DEFAULT_TOL, log_base: str = "e") -> dict:
    ch = _load(channel_file)
    res = max_output_purity(ch, restarts=restarts, tol=tol, seed=seed, base=log_base)
    return {
        "command": "minh2",
        "channel": ch.name,
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "max_purity": res.max_purity,
        "min_h2": res.min_h2,
        "log_base": log_base,
        "argmax_state": _state_pairs(res.argmax_state),
        "converged": res.converged,
        "iterations": res.iterations,
        "restarts": res.restarts_used,
        "tol": tol,
        "seed": seed,
    }


def _conditions(ch: QuantumChannel) -> dict:
    choi = choi_of(ch)
    lam_choi = linalg.min_eigenvalue(choi.matrix)
    square = ch.dim_in == ch.dim_out
    if square:
        pt = linalg.partial_transpose(choi.matrix, ch.dim_in, ch.dim_out)
        lam_pt = linalg.min_eigenvalue(pt)
        ppt = lam_choi >= -linalg.psd_threshold(choi.matrix) and lam_pt >= -linalg.psd_threshold(pt)
    else:
        lam_pt, ppt = None, None
    cond = theorem2_conditions(ch)
    return {
        "is_cp": lam_choi >= -linalg.psd_threshold(choi.matrix),
        "is_ppt_inducing": ppt,
        "cond_h": cond.cond_h_positive,
        "cond_hF": cond.cond_hF_positive,
        "min_eig_choi": lam_choi,
        "min_eig_choi_pt": lam_pt,
        "min_eig_h": cond.min_eig_h,
        "min_eig_hF": cond.min_eig_hF,
    }


def cmd_conditions(channel_file: str) -> dict:
    ch = _load(channel_file)
    return {"command": "conditions", "channel": ch.name, "dim_in": ch.dim_in, "dim_out": ch.dim_out,
            **_conditions(ch)}


def cmd_additivity(file1: str, file2: str, seed: int = 0, restarts: int = DEFAULT_RESTARTS,
                   tol: float = DEFAULT_TOL, log_base: str = "e") -> dict:
    ch1, ch2 = _load(file1), _load(file2)
    rep = additivity_gap(ch1, ch2, restarts=restarts, tol=tol, seed=seed, base=log_base)
    c1, c2 = _conditions(ch1), _conditions(ch2)
    certificates = [
        label
        for label, ok in (
            ("first:cond_h", c1["cond_h"]),
            ("first:cond_hF", c1["cond_hF"]),
            ("second:cond_h", c2["cond_h"]),
            ("second:cond_hF", c2["cond_hF"]),
        )
        if ok
    ]
    return {
        "command": "additivity",
        "channels": [ch1.name, ch2.name],
        "joint_max_purity": rep.joint_max_purity,
        "product_of_maxima": rep.product_of_maxima,
        "gap": rep.gap,
        "additive": rep.additive,
        "max_purity_first": rep.first.max_purity,
        "max_purity_second": rep.second.max_purity,
        "min_h2_joint": rep.joint.min_h2,
        "min_h2_sum": rep.first.min_h2 + rep.second.min_h2,
        "log_base": log_base,
        "converged": rep.joint.converged and rep.first.converged and rep.second.converged,
        "theorem1_applicable": bool(c1["is_ppt_inducing"] or c2["is_ppt_inducing"]),
        "theorem2_certificates": certificates,
        "restarts": restarts,
        "tol": tol,
        "seed": seed,
    }


def _flag(value) -> str:
    return "NA" if value is None else ("true" if value else "false")


def region_csv(d: int, step: float, workers: int = 1) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REGION_COLUMNS)
    for row in region_scan(d, step=step, workers=workers):
        writer.writerow([repr(row.a), repr(row.b), row.d, _flag(row.is_cp), _flag(row.is_ppt),
                         _flag(row.cond_h), _flag(row.cond_hF), _flag(row.boundary)])
    return buf.getvalue()


def cmd_wh_export(a: float, b: float, d: int) -> dict:
    p = WHParams(a, b, d)
    if not wh_is_cp(p):
        raise CLIError(f"WH({a}, {b}, {d}) is not completely positive")
    return channel_to_dict(wh_channel(p), name=f"WH({a!r},{b!r},{d})")


def cmd_extremal(d: int) -> dict:
    if d < 2:
        raise CLIError("d must be >= 2")
    rep = extremal_choi(d)
    choi = rep.choi.matrix
    real = realignment_entanglement_check(rep.choi)
    return {
        "command": "extremal",
        "d": d,
        "a": rep.params.a,
        "b": rep.params.b,
        "choi_trace": rep.choi.trace,
        "min_eig_choi": linalg.min_eigenvalue(choi),
        "min_eig_choi_pt": linalg.min_eigenvalue(linalg.partial_transpose(choi, d, d)),
        "realignment_sum": real.realignment_sum,
        "realignment_detected": real.detected,
        "closed_form_match": rep.match,
        "closed_form_residual_normalized": rep.residual_normalized,
        "closed_form_residual_unnormalized": rep.residual_unnormalized,
    }


# ---------------------------------------------------------------- argument parsing


def _global_options(defaults: bool) -> argparse.ArgumentParser:
    # Subparsers use SUPPRESS so flags given before the subcommand survive.
    def dflt(v):
        return v if defaults else argparse.SUPPRESS

    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=dflt(0), help="RNG seed (default 0)")
    p.add_argument("--restarts", type=int, default=dflt(DEFAULT_RESTARTS), help="random starts")
    p.add_argument("--tol", type=float, default=dflt(DEFAULT_TOL), help="purity-change tolerance")
    p.add_argument("--log-base", choices=("e", "2"), default=dflt("e"))
    p.add_argument("--format", choices=("json", "csv"), default=dflt("json"), dest="output_format")
    p.add_argument("--out", default=dflt(None), help="write output here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="renyi2", parents=[_global_options(True)],
                                     description="Minimal Rényi-2 output entropy of quantum channels")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _global_options(False)

    p = sub.add_parser("minh2", parents=[common], help="maximal output purity / minimal H2")
    p.add_argument("channel")
    p = sub.add_parser("conditions", parents=[common], help="CP, PPT-inducing and positivity conditions")
    p.add_argument("channel")
    p = sub.add_parser("additivity", parents=[common], help="additivity gap for a channel pair")
    p.add_argument("channel1")
    p.add_argument("channel2")
    p = sub.add_parser("wh-region", parents=[common], help="Werner-Holevo (a, b) region scan as CSV")
    p.add_argument("d", type=int)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=1)
    p = sub.add_parser("wh-export", parents=[common], help="write a Werner-Holevo channel file")
    p.add_argument("a", type=float)
    p.add_argument("b", type=float)
    p.add_argument("d", type=int)
    p = sub.add_parser("extremal", parents=[common], help="extremal PPT-inducing corner and its Choi matrix")
    p.add_argument("d", type=int)
    return parser


def _run(args) -> str:
    if args.restarts < 1:
        raise CLIError("--restarts must be >= 1")
    if args.tol <= 0:
        raise CLIError("--tol must be positive")
    cmd = args.command
    if cmd == "wh-region":
        if args.d < 2 or args.step <= 0:
            raise CLIError("wh-region needs d >= 2 and a positive --step")
        return region_csv(args.d, args.step, args.workers)
    if cmd == "wh-export":
        return json.dumps(cmd_wh_export(args.a, args.b, args.d)) + "\n"
    if cmd == "minh2":
        report = cmd_minh2(args.channel, args.seed, args.restarts, args.tol, args.log_base)
    elif cmd == "conditions":
        report = cmd_conditions(args.channel)
    elif cmd == "additivity":
        report = cmd_additivity(args.channel1, args.channel2, args.seed, args.restarts, args.tol, args.log_base)
    elif cmd == "extremal":
        report = cmd_extremal(args.d)
    else:  # pragma: no cover - argparse rejects unknown commands
        raise CLIError(f"unknown command {cmd}")
    return report_to_csv(report) if args.output_format == "csv" else dumps_report(report)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = _run(args)
        if args.out:
            try:
                Path(args.out).write_text(text)
            except OSError as exc:
                raise CLIError(f"cannot write {args.out}: {exc.strerror}") from None
        else:
            sys.stdout.write(text)
    except (CLIError, ValueError, RuntimeError) as exc:
        msg = " ".join(str(exc).split())
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": msg}) + "\n")
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
