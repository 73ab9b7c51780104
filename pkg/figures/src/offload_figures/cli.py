"""Command line entry point.

    offload-plot --csv results/scenario1.csv --fig fig2 --out fig2.png

Exit codes mirror the solver CLI: 0 on success, 2 when the CSV is valid
but holds no rows to plot, 3 on bad input (missing file, schema mismatch).
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .charts import FIGURES, FigureSpec, render
from .schema import EmptyCsvError, SchemaMismatch

EXIT_OK = 0
EXIT_EMPTY = 2
EXIT_BAD_INPUT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="offload-plot",
        description="Render a sweep chart from an edgeoffload scenario CSV",
    )
    parser.add_argument("--csv", required=True, help="path to the sweep CSV")
    parser.add_argument(
        "--fig",
        required=True,
        choices=sorted(FIGURES),
        help="which chart to draw",
    )
    parser.add_argument("--out", required=True, help="image file to write")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(csv=args.csv, fig_id=args.fig, out=args.out)
    try:
        out = render(spec)
    except EmptyCsvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (SchemaMismatch, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
