"""Command-line interface: run, verify, render.

Exit codes: 0 success, 2 validation error, 3 non-convergence when
--require-converged is set. The only environment variable honored is
HETCOVER_THREADS (worker threads for per-agent computations).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import DomainError, ValidationError
from .plots import FIGURE_KINDS, render_figure
from .sim import export_record, load_record, run_simulation, verify_distributedness


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetcover",
        description="Deploy heterogeneous mobile sensors by generalized Voronoi coverage control.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a simulation and export its record")
    run_p.add_argument("config", help="path to a JSON run configuration")
    run_p.add_argument("--out", help="output directory (default: output_dir from the config)")
    run_p.add_argument("--format", choices=("csv", "json"), default="csv")
    run_p.add_argument(
        "--require-converged",
        action="store_true",
        help="exit with status 3 when the run hits max_steps without converging",
    )

    verify_p = sub.add_parser(
        "verify", help="run and check neighbor-only recomputation at every 10th step"
    )
    verify_p.add_argument("config")

    render_p = sub.add_parser("render", help="render a figure from an exported record directory")
    render_p.add_argument("record_dir")
    render_p.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    render_p.add_argument("--out", help="output file (default: <record_dir>/<kind>.svg)")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    record = run_simulation(config)
    out_dir = args.out if args.out else config.output_dir
    files = export_record(record, out_dir, fmt=args.format)
    status = "converged" if record.converged else "did not converge"
    print(f"{status} after {record.n_steps} steps; objective {record.objective[-1]:.6g}")
    for f in files:
        print(f"wrote {f}")
    if args.require_converged and not record.converged:
        print("run did not converge within max_steps", file=sys.stderr)
        return 3
    return 0


def _cmd_verify(args) -> int:
    config = load_config(args.config)
    record = run_simulation(config)
    checkpoints = sorted(set(range(0, record.n_records, 10)) | {record.n_records - 1})
    all_ok = True
    for t in checkpoints:
        report = verify_distributedness(config, record.positions[t])
        ok = report.passed
        all_ok &= ok
        print(
            f"step {t}: max centroid discrepancy {report.max_discrepancy:.3g} "
            f"-> {'PASS' if ok else 'FAIL'}"
        )
    print("distributedness:", "PASS" if all_ok else "FAIL")
    return 0 if all_ok else 1


def _cmd_render(args) -> int:
    record = load_record(args.record_dir)
    out = args.out if args.out else Path(args.record_dir) / f"{args.kind}.svg"
    path = render_figure(record, args.kind, out)
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "verify": _cmd_verify, "render": _cmd_render}
    try:
        return handlers[args.command](args)
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
