"""Command-line interface: ``tristeer {gen,analyze,scan,verify}``.

Exit codes: 0 success, 1 validation or verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import boxes
from .analysis import ModelRangeError, analyze, scan, verify
from .states import FAMILIES, SETTINGS, STATES

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _add_source(p: argparse.ArgumentParser, box_file: bool):
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--state", choices=STATES)
    p.add_argument("--settings", choices=tuple(SETTINGS), default=None)
    p.add_argument("--v", type=float, default=None, help="visibility V")
    if box_file:
        p.add_argument("--box-file", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tristeer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write a family or state box to a file")
    _add_source(g, box_file=False)
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--out", default=None)

    a = sub.add_parser("analyze", help="evaluate every inequality on one box")
    _add_source(a, box_file=True)
    a.add_argument("--tol", type=float, default=1e-10)
    a.add_argument("--out", default=None)

    s = sub.add_parser("scan", help="sweep V and locate every threshold")
    s.add_argument("--family", choices=FAMILIES, required=True)
    s.add_argument("--v-min", type=float, default=0.0)
    s.add_argument("--v-max", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=1001)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=0, help="biseparable/product samples per bound check")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--out", default=None)
    s.add_argument("--quiet", action="store_true", help="skip the ASCII region strip")

    v = sub.add_parser("verify", help="check the explicit steering LHS-LHV decomposition")
    v.add_argument("--family", choices=FAMILIES, required=True)
    v.add_argument("--v", type=float, required=True)
    v.add_argument("--out", default=None)
    return parser


def _cmd_gen(args) -> int:
    if (args.family is None) == (args.state is None):
        raise _Usage("gen needs exactly one of --family or --state")
    if args.family:
        if args.v is None:
            raise _Usage("--family needs --v")
        box = boxes.family_box(args.family, args.v)
    else:
        from .states import settings_by_name, state_by_name

        rho = state_by_name(args.state, 1.0 if args.v is None else args.v)
        box = boxes.born_tripartite(rho, settings_by_name(args.settings or "svetlichny-optimal"))
    text = boxes.box_to_csv(box) if args.format == "csv" else boxes.box_to_json(box)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    if sum(x is not None for x in (args.family, args.state, args.box_file)) != 1:
        raise _Usage("analyze needs exactly one of --family, --state or --box-file")
    rep = analyze(args.family, args.v, args.state, args.settings, args.box_file, args.tol)
    _emit(_dump(rep), args.out)
    return EXIT_OK


def _cmd_scan(args) -> int:
    rep = scan(args.family, args.v_min, args.v_max, args.steps, args.tol, args.seed, args.samples)
    text = rep.to_csv() if args.format == "csv" else _dump(rep.to_dict())
    _emit(text, args.out)
    if not args.quiet:
        print(rep.strip())
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        res = verify(args.family, args.v)
    except ModelRangeError as exc:
        _emit(_dump({"family": args.family, "v": args.v, "error": str(exc), "pass": False}), args.out)
        return EXIT_FAIL
    _emit(_dump(res.to_dict()), args.out)
    return EXIT_OK if res.passed else EXIT_FAIL


class _Usage(Exception):
    pass


COMMANDS = {"gen": _cmd_gen, "analyze": _cmd_analyze, "scan": _cmd_scan, "verify": _cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.cmd](args)
    except _Usage as exc:
        parser.error(str(exc))
    except (boxes.BoxFormatError, boxes.BoxValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
