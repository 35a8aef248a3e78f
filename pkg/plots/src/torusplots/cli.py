"""Command line: torusplot KIND INPUT.csv -o OUT.png [style flags]."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, EmptyInputError, FigureRequest, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="torusplot",
        description="Render figures from toruskit CSV artifacts",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("inputs", nargs="+", help="input CSV file(s)")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    parser.add_argument("--title", default=None)
    parser.add_argument("--no-unit-circle", action="store_true",
                        help="spectrum: omit the unit-circle overlay")
    parser.add_argument("--tol-unit", type=float, default=1e-6,
                        help="spectrum: highlight |lambda-1| below this")
    parser.add_argument("--resonance-gridlines", action="store_true",
                        help="frequencies: draw half-integer gridlines")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    req = FigureRequest(
        kind=args.kind,
        inputs=args.inputs,
        output=args.output,
        title=args.title,
        unit_circle=not args.no_unit_circle,
        tol_unit=args.tol_unit,
        resonance_gridlines=args.resonance_gridlines,
        dpi=args.dpi,
    )
    try:
        path = render(req)
    except (SchemaError, EmptyInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
