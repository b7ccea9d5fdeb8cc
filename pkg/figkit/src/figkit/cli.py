"""figkit <kind> --in PATH [--summary PATH] --out PATH [--dpi N]"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .render import KINDS, FigureRequest, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figkit", description="Render figures from fringe-scan result files"
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="input_path", required=True, metavar="PATH")
    parser.add_argument("--summary", dest="summary_path", default=None, metavar="PATH")
    parser.add_argument("--out", dest="output_path", required=True, metavar="PATH")
    parser.add_argument("--dpi", type=int, default=150, metavar="N")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        request = FigureRequest(
            kind=args.kind,
            input_path=args.input_path,
            output_path=args.output_path,
            summary_path=args.summary_path,
            dpi=args.dpi,
        )
        out = render(request)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
