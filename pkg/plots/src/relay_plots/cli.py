"""Command line for rendering experiment figures from result CSVs."""

from __future__ import annotations

import argparse
import sys

from .figures import GROUPING, FigureSpec, RenderError, render


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rlnc-relay-plots",
        description="render figures from rlnc-relay result CSVs")
    sub = p.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one figure")
    p_render.add_argument("--fig", required=True, choices=sorted(GROUPING),
                          help="which figure's grouping rules to apply")
    p_render.add_argument("--in", dest="input_csv", required=True,
                          help="input CSV (rlnc-relay output)")
    p_render.add_argument("--out", required=True,
                          help="output image path (.svg default, .png works)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        series = render(FigureSpec(args.input_csv, args.fig, args.out))
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} ({len(series)} series)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
