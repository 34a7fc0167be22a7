"""Command line interface.

Subcommands:
    run <scenario.json> [--out report.json] [--seed N] [--stages a,b,c]
    validate <scenario.json>
    serve --port P --root DIR
    index --kind ndvi|nbr|bai --bands name=path ... --out out.asc

Exit codes: 0 success, 1 validation error, 2 execution error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .pipeline import StageError, render_report, run_pipeline
from .raster import GridParseError, compute_index, read_grid, write_grid
from .scenario import ScenarioError, ScenarioValidationError, load_scenario, validate_scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_EXECUTION = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pyroledger",
        description="Wildfire burn mapping, carbon emissions, and reversal-risk accounting")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario end to end")
    run_p.add_argument("scenario", help="scenario JSON file")
    run_p.add_argument("--out", help="write the report here (default: stdout)")
    run_p.add_argument("--seed", type=int, help="override the Monte Carlo master seed")
    run_p.add_argument("--stages", help="comma-separated stage subset to run")

    val_p = sub.add_parser("validate", help="validate a scenario and list findings")
    val_p.add_argument("scenario", help="scenario JSON file")

    serve_p = sub.add_parser("serve", help="serve scenarios over HTTP")
    serve_p.add_argument("--port", type=int, default=8800)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--root", required=True, help="directory of scenario JSON files")

    index_p = sub.add_parser("index", help="compute a spectral index grid")
    index_p.add_argument("--kind", required=True, choices=["ndvi", "nbr", "bai"])
    index_p.add_argument("--bands", required=True, nargs="+", metavar="NAME=PATH",
                         help="band grids, e.g. nir=pre_nir.asc red=pre_red.asc")
    index_p.add_argument("--out", required=True, help="output grid file")
    return parser


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    stages = args.stages.split(",") if args.stages else None
    try:
        report = run_pipeline(scenario, seed=args.seed, stages=stages)
    except ScenarioValidationError as exc:
        for finding in exc.findings:
            print(f"{finding.severity}: {finding.path}: {finding.message}", file=sys.stderr)
        return EXIT_VALIDATION
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXECUTION
    body = render_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    findings = validate_scenario(scenario)
    for finding in findings:
        print(f"{finding.severity}: {finding.path}: {finding.message}")
    errors = sum(1 for f in findings if f.severity == "error")
    if errors:
        print(f"{errors} error(s), {len(findings) - errors} warning(s)", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"ok ({len(findings)} warning(s))")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve

    serve(port=args.port, root=args.root, host=args.host)
    return EXIT_OK


def _cmd_index(args) -> int:
    bands = {}
    for spec in args.bands:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            print(f"error: --bands entries must look like name=path, got {spec!r}",
                  file=sys.stderr)
            return EXIT_VALIDATION
        bands[name.lower()] = path
    try:
        grids = {name: read_grid(path) for name, path in bands.items()}
        result = compute_index(args.kind, grids)
    except (GridParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXECUTION if isinstance(exc, GridParseError) else EXIT_VALIDATION
    write_grid(args.out, result)
    print(f"wrote {args.kind} grid to {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "serve": _cmd_serve,
        "index": _cmd_index,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
