"""``nogosig`` command line: ``run`` one overlap point or ``sweep`` a grid."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .report import GridSpec, RunConfig, UsageError, render_report, run_scenario, sweep_overlaps


def _add_common(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--s", type=float, default=0.0, help="overlap <psi1|psi2> in [0, 1)")
    ap.add_argument("--p", type=float, default=0.0, help="overlap <P1|P2> in [0, 1)")
    ap.add_argument("--c", type=float, default=0.0, help="output control overlap <C1|C2> in [0, 1)")
    ap.add_argument("--policy", choices=["by-program", "by-original", "fixed"], default="by-program")
    ap.add_argument("--n-blanks", type=int, default=4, dest="n")
    ap.add_argument("--m", type=int, default=1, help="program blank count")
    ap.add_argument("--qudit-dim", type=int, default=2, dest="N")
    ap.add_argument("--convention", choices=["raw", "normalized", "both"], default="both")
    ap.add_argument("--format", choices=["text", "json", "csv"], default="text")
    ap.add_argument("--out", default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nogosig",
        description="Signalling gap of a hypothetical perfect self-replicating machine.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate a single (s, p, c) point")
    _add_common(run)
    sweep = sub.add_parser("sweep", help="evaluate an (s, p) grid, s outer")
    _add_common(sweep)
    sweep.add_argument("--s-grid", default="0:0.8:0.4", help="start:stop:step")
    sweep.add_argument("--p-grid", default="0:0.8:0.4", help="start:stop:step")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        grids = {}
        if args.command == "sweep":
            grids = {"s_grid": GridSpec.parse(args.s_grid), "p_grid": GridSpec.parse(args.p_grid)}
        rc = RunConfig(s=args.s, p=args.p, c=args.c, policy=args.policy, N=args.N, m=args.m,
                       n=args.n, convention=args.convention, format=args.format,
                       output_path=args.out, **grids)
    except UsageError as exc:
        ap.error(str(exc))
    report = sweep_overlaps(rc) if args.command == "sweep" else run_scenario(rc)
    text = render_report(report, rc.format)
    if rc.output_path:
        Path(rc.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
