"""Command-line front end: ``aoimac {simulate,analyze,optimize,sweep,validate}``.

Exit codes: 0 ok, 1 validation failure, 2 usage/parse error, 3 config
error, 4 infeasible problem.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .analysis import AnalyticInputs, avg_aoi_closed_form, optimal_probabilities
from .config import (
    SEED_ENV,
    ConfigParseError,
    default_seed,
    load_spec,
    parse_matrix,
)
from .errors import DegenerateInputError, InfeasibleProblemError
from .experiments import (
    ANALYZE_COLUMNS,
    FIGURES,
    analyze_point,
    default_workers,
    format_rows,
    run_experiment,
    run_figure,
)

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load(args):
    spec = load_spec(args.config, check=False)
    overrides = {
        "lam": args.lam, "delta": args.delta, "horizon": args.horizon, "burn_in": args.burn_in,
        "policy": args.policy, "v": args.V, "q1": args.q1, "q2": args.q2,
    }
    if args.seed is not None:
        overrides["seeds"] = (args.seed,)
    # an explicit value for the swept variable collapses the sweep to that point
    swept = {"lambda": "lam", "delta": "delta", "V": "v"}.get(spec.sweep_variable)
    if swept is not None and overrides[swept] is not None:
        spec = replace(spec, sweep_variable=None, grid=())
    return spec.with_overrides(**overrides)


def cmd_simulate(args) -> int:
    spec = _load(args)
    rows = run_experiment(spec, args.workers)
    _emit(format_rows(rows), args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    spec = _load(args)
    rows = []
    for p in spec.points():
        if spec.policy == "PRA":
            q1, q2 = spec.q1, spec.q2
        else:
            try:
                opt = optimal_probabilities(p["lam"], p["delta"], spec.matrix, spec.xi)
                q1, q2 = opt.q1_star, opt.q2_star
            except ValueError:
                # infeasible points still get a row, flagged by analyze_point
                q1, q2 = 1.0, 1.0
        rows.append(analyze_point(spec.matrix, spec.mpr, p["lam"], p["delta"], q1, q2))
    _emit(format_rows(rows, ANALYZE_COLUMNS), args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    matrix, _ = parse_matrix(args.matrix)
    opt = optimal_probabilities(args.lam, args.delta, matrix, args.xi)
    age = avg_aoi_closed_form(AnalyticInputs(args.lam, args.delta, opt.q1_star, opt.q2_star, matrix))
    print("q1,q2,case,avg_aoi")
    print(f"{opt.q1_star:.10g},{opt.q2_star:.10g},{opt.case_id},{age:.10g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    seeds = (args.seed if args.seed is not None else default_seed(),)
    paths = run_figure(args.figure, args.out, seeds=seeds, horizon=args.horizon, workers=args.workers)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_validation

    results = run_validation(
        tolerance=args.tolerance,
        horizon=args.horizon,
        lambda_grid=args.lambda_grid,
        criteria=args.criteria,
        seed=args.seed,
        on_result=lambda r: print(r.line(), flush=True),
    )
    failed = [r for r in results if not r.passed]
    if failed:
        names = ", ".join(f"{r.number} ({r.name})" for r in failed)
        print(f"FAILED: {names}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def _float_list(text: str):
    if text.strip() == "":
        return []
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _matrix_arg(text: str):
    if text.lower() in ("strong", "weak"):
        return text.lower()
    parts = _float_list(text)
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("matrix must be 'strong', 'weak' or p11,p112,p22,p212")
    return dict(zip(("p11", "p112", "p22", "p212"), parts))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aoimac", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, help=f"root seed (default: ${SEED_ENV} or 1)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def config_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="JSON experiment file")
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        p.add_argument("--horizon", type=int)
        p.add_argument("--burn-in", dest="burn_in", type=int)
        p.add_argument("--policy")
        p.add_argument("--V", type=float)
        p.add_argument("--q1", type=float)
        p.add_argument("--q2", type=float)
        p.add_argument("--out", help="output CSV (default stdout)")
        p.add_argument("--workers", type=int, default=1)
        return p

    config_cmd("simulate", "simulate a config; one CSV row per grid point and seed").set_defaults(fn=cmd_simulate)
    config_cmd("analyze", "closed-form values for a config").set_defaults(fn=cmd_analyze)

    p = sub.add_parser("optimize", help="optimal PRA transmit probabilities")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--matrix", type=_matrix_arg, default="strong")
    p.add_argument("--xi", type=float, default=0.001)
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("sweep", help="run a canned figure sweep")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--horizon", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--workers", type=int, default=default_workers())
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("validate", help="run the acceptance checks")
    p.add_argument("--tolerance", type=float, default=0.02)
    p.add_argument("--horizon", type=int, default=1_000_000)
    p.add_argument("--lambda-grid", dest="lambda_grid", type=_float_list,
                   default=[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    p.add_argument("--criteria", type=_int_list, help="comma-separated criterion numbers")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigParseError as exc:
        print(f"aoimac: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"aoimac: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleProblemError, DegenerateInputError) as exc:
        print(f"aoimac: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"aoimac: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
