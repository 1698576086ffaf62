"""Command line entry point: render --kind KIND --in DIR --out FILE."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .io import SchemaError
from .render import KINDS, PlotSpec, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixguide-plots", description="Render figures from mixguide CSV artifacts"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="in_dir", type=Path, required=True, help="artifact directory")
    p.add_argument("--out", type=Path, required=True, help="output image file")
    p.add_argument("--dpi", type=int, default=130)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    spec = PlotSpec(in_dir=args.in_dir, kind=args.kind, out_path=args.out, dpi=args.dpi)
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
