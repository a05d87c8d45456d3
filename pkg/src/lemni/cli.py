"""Command line: ``lemni gen | verify | critical | plot``.

Exit codes: 0 pass, 1 invariant failure, 2 usage error, 3 numerical or
input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import List, Optional

from . import __version__
from .critical import bracket_rungs, critical_points
from .errors import LemniError
from .generator import GenSpec, generate
from .io import FormatError, batch_to_dict, dumps_instance, ladder_to_dict, read_instance, report_to_dict
from .svgplot import PlotSpec, auto_levels, render_svg
from .verify import VerifyConfig, verify_batch, verify_instance

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _degrees(text: str):
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    if not 1 <= lo <= hi:
        raise argparse.ArgumentTypeError(f"need 1 <= LO <= HI, got {text!r}")
    return lo, hi


def _weights(text: str):
    try:
        w = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated weights, got {text!r}")
    if len(w) != 3 or any(x < 0 for x in w) or sum(w) <= 0:
        raise argparse.ArgumentTypeError("weights for multiplicities 1,2,3 must be non-negative with positive sum")
    return w


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(payload) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lemni", description="Numerical checks of Macdonald's theorem for polynomials.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--n", type=_positive_int, required=True, help="number of zeros")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mult-weights", type=_weights, default=None, metavar="W1,W2,W3")
    g.add_argument("--out", default=None)

    v = sub.add_parser("verify", help="verify one instance or a random batch")
    src = v.add_mutually_exclusive_group()
    src.add_argument("--input", default=None)
    src.add_argument("--n", type=_positive_int, default=None)
    src.add_argument("--trials", type=_positive_int, default=None)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--degrees", type=_degrees, default=(2, 6), metavar="LO:HI")
    v.add_argument("--grid", type=int, default=512)
    v.add_argument("--rel-gap", type=float, default=0.01)
    v.add_argument("--threads", type=int, default=None, help="worker processes (default: LEMNI_THREADS, 0 = auto)")
    v.add_argument("--out", default=None)

    c = sub.add_parser("critical", help="critical points, moduli and brackets")
    c.add_argument("--input", required=True)
    c.add_argument("--rel-gap", type=float, default=0.01)
    c.add_argument("--out", default=None)

    pl = sub.add_parser("plot", help="SVG contour plot")
    pl.add_argument("--input", required=True)
    pl.add_argument("--levels", default="auto", help="'auto' or comma-separated ln|f| values")
    pl.add_argument("--out", default=None)
    pl.add_argument("--size", type=_positive_int, default=600)
    pl.add_argument("--grid", type=int, default=512)
    pl.add_argument("--show-critical", action="store_true")
    pl.add_argument("--hide-roots", action="store_true")
    return p


def cmd_gen(args) -> int:
    spec = GenSpec(args.n, args.seed, args.mult_weights)
    inst = generate(spec)
    _emit(dumps_instance(inst, args.seed), args.out)
    if args.out:
        print(inst.digest)
    return EXIT_OK


def cmd_verify(args) -> int:
    if not 0 < args.rel_gap < 0.5 or args.grid < 16:
        print("error: --rel-gap must lie in (0, 0.5) and --grid be >= 16", file=sys.stderr)
        return EXIT_USAGE
    config = VerifyConfig(rel_gap=args.rel_gap, grid=args.grid)
    try:
        if args.trials is not None:
            summary = verify_batch(args.trials, args.degrees, args.seed, config, threads=args.threads)
            payload = batch_to_dict(summary)
            ok = summary.all_pass
            print(f"{summary.n_pass}/{summary.n_trials} instances pass; "
                  f"{len(summary.verdicts)} verdicts, method agreement {summary.agreement_rate:.2%}",
                  file=sys.stderr)
        else:
            if args.input is not None:
                inst = read_instance(args.input)
            else:
                inst = generate(GenSpec(args.n or 2, args.seed))
            rep = verify_instance(inst, config)
            payload = report_to_dict(rep)
            ok = rep.overall_pass
            print(f"{inst.digest}: {'PASS' if ok else 'FAIL'} staircase {payload['staircase_text']}",
                  file=sys.stderr)
    except (FormatError, OSError, LemniError) as exc:
        _emit(_dump({"error": type(exc).__name__, "message": str(exc)}), args.out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(_dump(payload), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_critical(args) -> int:
    try:
        inst = read_instance(args.input)
        ladder = critical_points(inst)
        rungs = bracket_rungs(ladder, args.rel_gap)
    except (FormatError, OSError, LemniError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    payload = {"digest": inst.digest, **ladder_to_dict(ladder, rungs)}
    payload["brackets"] = [list(r.bracket) for r in rungs]
    _emit(_dump(payload), args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        inst = read_instance(args.input)
        ladder = critical_points(inst)
        if args.levels.strip() == "auto":
            levels = auto_levels(inst, ladder)
        else:
            try:
                levels = sorted(float(x) for x in args.levels.split(","))
            except ValueError:
                print(f"error: bad --levels {args.levels!r}", file=sys.stderr)
                return EXIT_USAGE
        spec = PlotSpec(levels, None, args.size, args.size, not args.hide_roots, args.show_critical)
        svg = render_svg(inst, spec, grid=args.grid, ladder=ladder)
    except (FormatError, OSError, LemniError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(svg, args.out)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"gen": cmd_gen, "verify": cmd_verify, "critical": cmd_critical, "plot": cmd_plot}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
