"""Command-line entry point: ``render --kind <kind> --in <csv> --out <image>``."""

from __future__ import annotations

import argparse
import sys

from .core import KINDS, PlotSpec, RenderError, render

EXIT_OK = 0
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a benchmark CSV as a figure (PNG or SVG).",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument(
        "--in", dest="input_csv", required=True, metavar="CSV",
        help="input table following the harness contract for the kind",
    )
    parser.add_argument(
        "--out", dest="output_image", required=True, metavar="IMAGE",
        help="output file; format chosen by extension (.png or .svg)",
    )
    parser.add_argument("--xlabel", help="override the x-axis label")
    parser.add_argument("--ylabel", help="override the y-axis label")
    parser.add_argument(
        "--logx", choices=("yes", "no"), help="override the x-axis scale"
    )
    parser.add_argument(
        "--logy", choices=("yes", "no"), help="override the y-axis scale"
    )
    return parser


def _tristate(value: "str | None") -> "bool | None":
    return None if value is None else value == "yes"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(
            input_csv=args.input_csv,
            output_image=args.output_image,
            kind=args.kind,
            xlabel=args.xlabel,
            ylabel=args.ylabel,
            logx=_tristate(args.logx),
            logy=_tristate(args.logy),
        )
        out = render(spec)
    except RenderError as exc:
        print(f"render: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
