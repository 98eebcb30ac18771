"""rmd-figures: render figures from rmd-lab output directories.

Usage: rmd-figures render --figure <id> --input <dir> --out <path.png>
Exit codes: 0 success, 1 bad inputs.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib.pyplot as plt

from .render import FIGURE_IDS, FigureInputError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmd-figures",
                                     description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("render", help="render one figure from an output dir")
    sp.add_argument("--figure", required=True, choices=FIGURE_IDS)
    sp.add_argument("--input", required=True, help="rmd-lab output directory")
    sp.add_argument("--out", required=True, help="image path (.png/.svg/.pdf)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(figure_id=args.figure, input_dir=args.input,
                          out_path=args.out)
        fig = render(spec)
    except FigureInputError as exc:
        print(f"figure input error: {exc}", file=sys.stderr)
        return 1
    plt.close(fig)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
