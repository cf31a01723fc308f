"""plotview <kind> --in ... --out fig.png

Renders one static figure from kwmspec CLI artifacts.  Exit codes: 0 on
success, 1 when an input does not match the expected schema (the message
names the offending field), 2 for usage errors.
"""

import argparse
import sys

from .render import KINDS, FigureSpec, render_to_file
from .schemas import SchemaError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plotview",
        description="Static figures from kwmspec report JSON and CSV files")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="FILE",
                        help="input artifact(s); periodogram-overlay takes "
                             "the CSV then the design spectrum JSON")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--title", default=None)
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(kind=args.kind, inputs=args.inputs, output=args.out,
                      title=args.title, xlabel=args.xlabel,
                      ylabel=args.ylabel)
    try:
        path = render_to_file(spec)
    except SchemaError as exc:
        print(f"plotview: {exc}", file=sys.stderr)
        return 1
    print(f"plotview: wrote {path}", file=sys.stderr)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
