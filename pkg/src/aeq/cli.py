"""Command line front end.

Subcommands: check, psi, equiv, quasi, biasym, classify, example.  Every
run writes deterministic CSV/JSON artifacts (and companion PNG figures
unless --no-plot) into --out-dir.  Exit codes: 0 all requested verdicts
PASS, 1 some verdict FAIL, 2 error (machine-readable JSON on stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import AeqError
from .pipelines import (LinearContext, QuasiContext, RunResult,
                        pipeline_biasym, pipeline_check, pipeline_classify,
                        pipeline_equiv, pipeline_example, pipeline_psi,
                        pipeline_quasi)
from .reports import verdicts_to_json, write_csv, write_json
from .scenario import BUILTIN_NAMES, builtin, parse


def _add_common(sub):
    sub.add_argument("--scenario", help="path to a .aeq scenario file")
    sub.add_argument("--builtin", choices=BUILTIN_NAMES,
                     help="use a built-in scenario instead of a file")
    sub.add_argument("--alpha", type=float, help="override the builtin's alpha")
    sub.add_argument("--beta", type=float, help="override the builtin's beta")
    sub.add_argument("--k1", type=float, help="override the builtin's K1")
    sub.add_argument("--horizon", type=float, help="override the run horizon")
    sub.add_argument("--tol", type=float, help="override the integrator/series tolerance")
    sub.add_argument("--eps", type=float, help="override the series smallness eps")
    sub.add_argument("--check-tol", type=float, help="override the PASS threshold")
    sub.add_argument("--out-dir", default="out", help="artifact directory (default: out)")
    sub.add_argument("--format", choices=("csv", "json", "both"), default="both",
                     help="which report files to write (default: both)")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for sampled validation grids (default: 0)")
    sub.add_argument("--no-plot", action="store_true",
                     help="skip rendering PNG figures")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aeq",
        description="Constructive asymptotic-equivalence toolkit for perturbed "
                    "linear and quasilinear ODE systems")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("check", help="evaluate named conditions (C1..C7, Eq14)")
    p.add_argument("--conditions", required=True,
                   help="comma-separated, e.g. C1,C2")
    _add_common(p)

    for name, doc in (("psi", "build the decay matrix and dump it as CSV"),
                      ("equiv", "full asymptotic-equivalence report"),
                      ("quasi", "quasilinear pipeline (C3-C5, Eq14, limit vector)"),
                      ("biasym", "two-sided pipeline (parity, symmetric Psi)"),
                      ("classify", "classify a mapped solution against an AP signal")):
        p = subs.add_parser(name, help=doc)
        _add_common(p)

    p = subs.add_parser("example", help="end-to-end reproduction of a built-in")
    p.add_argument("number", type=int, choices=(1, 2, 3))
    _add_common(p)
    return parser


def _builtin_params(args, name):
    params = {}
    if args.alpha is not None:
        params["alpha"] = args.alpha
    if args.beta is not None:
        if name != "example2":
            raise AeqError("--beta only applies to example2")
        params["beta"] = args.beta
    if args.k1 is not None:
        if name not in ("example1", "example2"):
            raise AeqError("--k1 only applies to example1/example2")
        params["k1"] = args.k1
    if args.horizon is not None:
        params["horizon"] = args.horizon
    return params


def load_scenario(args, builtin_name=None):
    name = builtin_name or args.builtin
    if args.scenario and name:
        raise AeqError("give either --scenario or --builtin, not both")
    if args.scenario:
        with open(args.scenario, "r", encoding="utf-8") as fh:
            scenario = parse(fh.read())
    elif name:
        scenario = builtin(name, **_builtin_params(args, name))
    else:
        raise AeqError("a scenario is required: --scenario FILE or --builtin NAME")
    if args.tol is not None:
        scenario.run.tol = args.tol
    if args.eps is not None:
        scenario.run.eps = args.eps
    if args.check_tol is not None:
        scenario.run.check_tol = args.check_tol
    if args.horizon is not None:
        scenario.run.horizon = args.horizon
    return scenario


def write_result(result: RunResult, args) -> int:
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    if args.format in ("csv", "both"):
        for fname, (header, cols) in sorted(result.tables.items()):
            write_csv(os.path.join(out_dir, fname), header, cols)
    if args.format in ("json", "both"):
        payload = verdicts_to_json(result.name, result.params, result.verdicts)
        payload.update(result.blocks)
        write_json(os.path.join(out_dir, "verdicts.json"), payload)
    if not args.no_plot:
        from .plots import render_figure
        for fname, spec in sorted(result.figures.items()):
            render_figure(os.path.join(out_dir, fname), spec)
    for v in result.verdicts:
        end = v.extra.get("end", "")
        tag = f"{v.condition}{end}"
        print(f"{tag}: {'PASS' if v.passed else 'FAIL'} "
              f"(worst {v.worst_value:.6g} at t={v.at_t:g})")
    return 0 if result.all_pass else 1


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "example":
            scenario = load_scenario(args, builtin_name=f"example{args.number}")
            result = pipeline_example(scenario, seed=args.seed)
        elif args.command == "check":
            scenario = load_scenario(args)
            result = pipeline_check(scenario, args.conditions.split(","),
                                    seed=args.seed)
        elif args.command == "psi":
            result = pipeline_psi(LinearContext(load_scenario(args), seed=args.seed))
        elif args.command == "equiv":
            result = pipeline_equiv(LinearContext(load_scenario(args), seed=args.seed))
        elif args.command == "quasi":
            result = pipeline_quasi(QuasiContext(load_scenario(args), seed=args.seed))
        elif args.command == "biasym":
            result = pipeline_biasym(LinearContext(load_scenario(args), seed=args.seed))
        elif args.command == "classify":
            result = pipeline_classify(LinearContext(load_scenario(args), seed=args.seed))
        else:  # pragma: no cover
            parser.error(f"unhandled command {args.command}")
    except AeqError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except OSError as exc:
        json.dump({"error": "OSError", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    result.params = {"seed": args.seed, "format": args.format}
    return write_result(result, args)


def main():  # pragma: no cover
    sys.exit(run())
