"""Command line front end.

    minvec solve    --scenario s.json [--out DIR] [--seed N] [--strict]
    minvec trace    --scenario s.json [--out DIR] [--emit-plot] ...
    minvec subspace --scenario s.json [--out DIR] [--emit-plot] ...
    minvec verify   [--out DIR]
    minvec gallery  --scenario s.json [--out DIR]

Exit codes: 0 success, 2 input error, 3 solver error, 4 strict-mode
invariant failure (or verification failure). The output directory is
resolved from --out, then the scenario's out_dir, then MINVEC_OUT_DIR,
then the working directory.
"""

import argparse
import dataclasses
import os
import sys

from .errors import InputError, SolverError
from .operators import quasinilpotence_profile
from .pipeline import run_pipeline
from .reporting import (build_report, emit_plots, verify_only, write_matrix_csv,
                        write_report, write_trace_csv)
from .scenario import load_scenario

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_STRICT = 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minvec",
        description="Minimal-vector solves, decay traces, and invariant "
                    "subspace candidates for finite-dimensional operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_scenario in (("solve", True), ("trace", True),
                                 ("subspace", True), ("verify", False),
                                 ("gallery", True)):
        cmd = sub.add_parser(name)
        if needs_scenario:
            cmd.add_argument("--scenario", required=True,
                             help="path to a scenario JSON file")
        cmd.add_argument("--out", default=None,
                         help="output directory (default: scenario out_dir, "
                              "then MINVEC_OUT_DIR, then '.')")
        cmd.add_argument("--emit-plot", action="store_true",
                         help="also write plots.svg")
        cmd.add_argument("--strict", action="store_true",
                         help="exit 4 when any invariant check fails")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the scenario seed")
    return parser


def _resolve_out(args, scenario=None) -> str:
    out = args.out
    if out is None and scenario is not None and scenario.out_dir:
        out = scenario.out_dir
    if out is None:
        out = os.environ.get("MINVEC_OUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _run_stage(args, stage: str) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    out = _resolve_out(args, scenario)
    result = run_pipeline(scenario, stage=stage)
    write_trace_csv(result.trace, os.path.join(out, "trace.csv"))
    write_report(build_report(result), os.path.join(out, "report.json"))
    if result.candidate is not None:
        write_matrix_csv(result.candidate.basis, os.path.join(out, "basis.csv"))
    if args.emit_plot:
        emit_plots(result, os.path.join(out, "plots.svg"))
    for rec in result.trace.records:
        sol = rec.solution
        ratio = "" if rec.ratio is None else f"  ratio={rec.ratio:.6g}"
        print(f"n={rec.power}: d={sol.min_norm:.9g}{ratio}")
    if result.plan is not None:
        print(f"plan: powers {list(result.plan.indices)} "
              f"(decaying={result.plan.decaying})")
    if result.candidate is not None:
        print(f"subspace: dim={result.candidate.dim} of "
              f"{result.candidate.ambient_dim}, "
              f"support zeroed {result.support.zeroed} coordinates")
    if result.findings:
        print(f"findings ({len(result.findings)}):")
        for name in result.findings:
            print(f"  - {name}")
    else:
        print(f"all {len(result.checks)} checks passed")
    print(f"wrote {out}/trace.csv, {out}/report.json")
    if result.findings and args.strict:
        return EXIT_STRICT
    return EXIT_OK


def _run_verify(args) -> int:
    out = _resolve_out(args)
    report_path = os.path.join(out, "report.json")
    trace_path = os.path.join(out, "trace.csv")
    code, messages = verify_only(
        report_path, trace_path if os.path.exists(trace_path) else None)
    for message in messages:
        print(message)
    return code


def _run_gallery(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _resolve_out(args, scenario)
    op = scenario.build_operator()
    write_matrix_csv(op.matrix, os.path.join(out, "operator.csv"))
    profile = quasinilpotence_profile(op, min(op.dim, 8))
    print(f"{scenario.operator_spec.kind.value}({op.dim}), norm "
          f"{scenario.kind.value}")
    print(f"injective: {op.is_injective} "
          f"(singular values {op.smallest_singular_value:.3e}"
          f"..{op.largest_singular_value:.3e})")
    print("||Q^n||^(1/n):", " ".join(f"{v:.6g}" for v in profile))
    print(f"wrote {out}/operator.csv")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _run_verify(args)
        if args.command == "gallery":
            return _run_gallery(args)
        return _run_stage(args, args.command)
    except InputError as exc:
        print(f"minvec: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"minvec: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
