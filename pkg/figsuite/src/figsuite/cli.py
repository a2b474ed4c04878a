"""Command-line entry point: CSV in, image out."""
from __future__ import annotations

import argparse
import sys

from .csvio import SchemaError
from .style import FORMATS
from .surfaces import render_grid_surfaces
from .trace import render_multipole_trace


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figsuite",
        description="Render acspin experiment CSVs into figures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="per-step multipole heatmap")
    p.add_argument("--csv", required=True, help="multipole-trace CSV")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--format", choices=FORMATS, default=None)
    p.set_defaults(render=render_multipole_trace)

    p = sub.add_parser("surfaces", help="strategy surfaces or power-law fit")
    p.add_argument("--csv", required=True, help="grid or power-law CSV")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--format", choices=FORMATS, default=None)
    p.set_defaults(render=render_grid_surfaces)

    args = parser.parse_args(argv)
    try:
        summary = args.render(args.csv, args.out, args.format)
    except SchemaError as err:
        print(f"rejected: {err}", file=sys.stderr)
        return 2
    print(summary["path"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
