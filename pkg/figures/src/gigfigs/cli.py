"""Command-line figure builder: table paths in, image plus sidecar out."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureSpec, TableGroup, render
from .tables import SchemaError


def _group(text: str) -> TableGroup:
    """Parse LABEL:PATH[,PATH...] into a labeled table group."""
    label, sep, rest = text.partition(":")
    if not sep or not label or not rest:
        raise argparse.ArgumentTypeError(f"expected LABEL:PATH[,PATH...], got {text!r}")
    return TableGroup(label, tuple(Path(p) for p in rest.split(",")))


def _tables_spec(args: argparse.Namespace) -> FigureSpec:
    group = TableGroup("all", tuple(Path(p) for p in args.tables))
    return FigureSpec(args.kind, (group,), Path(args.out))


def _groups_spec(args: argparse.Namespace) -> FigureSpec:
    window = tuple(args.window) if getattr(args, "window", None) else None
    return FigureSpec(args.kind, tuple(args.groups), Path(args.out), window=window)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gigfigs",
        description="Render figures and fit sidecars from simulator CSV tables",
    )
    sub = parser.add_subparsers(dest="kind", required=True)

    for kind, help_text in (
        ("beveridge", "unemployment vs vacancy scatter with hyperbolic fit"),
        ("okun", "per-run growth deltas with fitted line (tables in sweep order)"),
    ):
        p = sub.add_parser(kind, help=help_text)
        p.add_argument("tables", nargs="+", help="market tables")
        p.add_argument("--out", required=True, help="output image path")
        p.set_defaults(build=_tables_spec)

    gini_p = sub.add_parser("gini", help="final inequality bars, one per labeled group")
    gini_p.add_argument(
        "--group",
        dest="groups",
        type=_group,
        action="append",
        required=True,
        metavar="LABEL:AGENTS.CSV[,AGENTS.CSV...]",
    )
    gini_p.add_argument("--out", required=True)
    gini_p.set_defaults(build=_groups_spec)

    for kind, help_text in (
        ("price-paths", "winning-bid trajectories, one labeled series per table"),
        ("train-rate", "training-share trajectories, one labeled series per table"),
        ("recession", "training-share panels with a shaded round window"),
    ):
        p = sub.add_parser(kind, help=help_text)
        p.add_argument(
            "--series",
            dest="groups",
            type=_group,
            action="append",
            required=True,
            metavar="LABEL:MARKET.CSV",
        )
        p.add_argument("--out", required=True)
        if kind == "recession":
            p.add_argument("--window", type=int, nargs=2, required=True, metavar=("START", "STOP"))
        p.set_defaults(build=_groups_spec)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        image, sidecar = render(args.build(args))
    except SchemaError as err:
        print(f"error: schema: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: io: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: value: {err}", file=sys.stderr)
        return 2
    print(image)
    print(sidecar)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
