"""``veltman`` command line.

Exit codes: 0 success or valid, 1 countermodel or mismatch, 2 usage error or
exhausted budget.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .conditions import WitnessError
from .formula import ParseError, parse, to_text, variables, var_key
from .frames import (
    FrameFormatError, count_frames, enumerate_frames, frame_hash, parse_frame, serialize_frame,
)
from .harness import FAMILIES, correspond, hierarchy, renaming_identity, separate
from .schemata import generate, parse_schema_id
from .semantics import (
    DEFAULT_BUDGET, BudgetExceeded, Countermodel, Exhaustive, Sampled, Valid, format_countermodel,
    frame_valid,
)

OK, REFUTED, ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _write(out: str | None, text: str) -> None:
    if out:
        Path(out).write_text(text)


def _strategy(args, default_exhaustive: bool):
    if args.samples is not None:
        return Sampled(args.samples, args.seed)
    if args.exhaustive or default_exhaustive:
        return Exhaustive(args.budget)
    return None


def _formula_from(args):
    if args.formula and args.schema:
        raise UsageError("give either --formula or --schema, not both")
    if args.formula:
        return parse(args.formula)
    if args.schema:
        return generate(parse_schema_id(args.schema))
    raise UsageError("need --formula or --schema")


def cmd_gen(args) -> int:
    f = generate(parse_schema_id(args.schema))
    print(to_text(f))
    print("vars " + " ".join(p.name for p in sorted(variables(f), key=var_key)))
    return OK


def cmd_check(args) -> int:
    frame = parse_frame(Path(args.frame).read_text())
    f = _formula_from(args)
    verdict = frame_valid(frame, f, _strategy(args, default_exhaustive=True))
    if isinstance(verdict, Countermodel):
        text = format_countermodel(frame, verdict.valuation, verdict.world, f)
        print(f"countermodel at world {verdict.world}")
        print(text, end="")
        _write(args.out, text)
        return REFUTED
    if isinstance(verdict, Valid):
        print(f"valid ({verdict.checked} valuations checked)")
    else:
        print(f"no countermodel in {verdict.samples} samples (seed {verdict.seed})")
    return OK


def cmd_frame(args) -> int:
    if args.action == "validate":
        text = Path(args.file).read_text()
        try:
            frame = parse_frame(text)
        except FrameFormatError as exc:
            print(f"invalid: {exc}")
            return REFUTED
        print(f"valid frame {frame_hash(frame)} with {frame.n} worlds")
        return OK
    dedup = args.dedup if args.dedup is not None else args.action == "enumerate"
    if args.action == "count":
        print(count_frames(args.size, dedup=dedup))
        return OK
    chunks = []
    for i, frame in enumerate(enumerate_frames(args.size, dedup=dedup)):
        chunks.append(f"# frame {i} {frame_hash(frame)}\n{serialize_frame(frame)}")
    text = "\n".join(chunks)
    if args.out:
        _write(args.out, text)
        print(f"{len(chunks)} frames written to {args.out}")
    else:
        print(text, end="")
    return OK


def cmd_correspond(args) -> int:
    if args.family in ("slim", "broad"):
        if args.n is None:
            raise UsageError(f"{args.family} needs an index")
    elif args.n is not None:
        raise UsageError(f"{args.family} takes no index")
    rep = correspond(args.family, args.n, args.size, _strategy(args, False),
                     True if args.dedup is None else args.dedup)
    print(rep.to_text(args.verbose), end="")
    for m in rep.mismatches:
        print(m, end="" if m.endswith("\n") else "\n")
    _write(args.out, rep.to_json())
    return OK if rep.ok else REFUTED


def cmd_separate(args) -> int:
    if args.n == args.m:
        raise UsageError("separate needs two different indices")
    cert, seen = separate(args.n, args.m, args.max)
    if cert is None:
        print(f"no certificate among {seen} frames of at most {args.max} worlds")
        return REFUTED
    text = cert.to_text()
    print(f"certificate on {cert.frame.n} worlds ({seen} frames examined)")
    print(text, end="")
    _write(args.out, text)
    return OK


def cmd_hierarchy(args) -> int:
    if args.syntactic:
        bad = 0
        for k, same in renaming_identity(args.max):
            print(f"k={k} R_{2 * k} == renamed R~_{k}: {'yes' if same else 'NO'}")
            bad += not same
        print(f"mismatches {bad}")
        return OK if not bad else REFUTED
    rep = hierarchy(args.max, args.size, True if args.dedup is None else args.dedup)
    print(rep.to_text(args.verbose), end="")
    for m in rep.mismatches:
        print(m, end="" if m.endswith("\n") else "\n")
    _write(args.out, rep.to_json())
    return OK if rep.ok else REFUTED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--exhaustive", action="store_true", help="check every valuation")
    common.add_argument("--samples", type=int, metavar="N", help="check N random valuations")
    common.add_argument("--seed", type=int, default=0, metavar="S")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, metavar="B",
                        help="refuse exhaustive searches over more than 2^B valuations")
    common.add_argument("--dedup", type=_bool, metavar="BOOL")
    common.add_argument("--out", metavar="FILE")
    common.add_argument("-v", "--verbose", action="store_true", help="print one row per frame")

    p = argparse.ArgumentParser(prog="veltman", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="print a principle")
    g.add_argument("schema", nargs=2, metavar=("FAMILY", "ARG"))
    g.set_defaults(run=cmd_gen)

    c = sub.add_parser("check", parents=[common], help="check a formula on a frame file")
    c.add_argument("frame")
    c.add_argument("--formula")
    c.add_argument("--schema", nargs=2, metavar=("FAMILY", "ARG"))
    c.set_defaults(run=cmd_check)

    f = sub.add_parser("frame", parents=[common], help="validate, enumerate or count frames")
    f.add_argument("action", choices=("validate", "enumerate", "count"))
    f.add_argument("file", nargs="?")
    f.add_argument("--size", type=int)
    f.set_defaults(run=cmd_frame)

    r = sub.add_parser("correspond", parents=[common], help="frame condition vs principle sweep")
    r.add_argument("family", choices=FAMILIES)
    r.add_argument("n", nargs="?", type=int)
    r.add_argument("--size", type=int, default=4)
    r.set_defaults(run=cmd_correspond)

    s = sub.add_parser("separate", parents=[common], help="find a frame separating R^n from R^m")
    s.add_argument("n", type=int)
    s.add_argument("m", type=int)
    s.add_argument("--max", type=int, default=7)
    s.set_defaults(run=cmd_separate)

    h = sub.add_parser("hierarchy", parents=[common], help="monotonicity of the slim conditions")
    h.add_argument("--max", type=int, default=3)
    h.add_argument("--size", type=int, default=4)
    h.add_argument("--syntactic", action="store_true", help="check the index-reversal identity")
    h.set_defaults(run=cmd_hierarchy)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ERROR if exc.code else OK
    if args.command == "frame":
        if args.action == "validate" and not args.file:
            print("error: frame validate needs a FILE", file=sys.stderr)
            return ERROR
        if args.action != "validate" and args.size is None:
            print("error: --size is required", file=sys.stderr)
            return ERROR
    try:
        return args.run(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    except (UsageError, ParseError, FrameFormatError, ValueError, OSError, WitnessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
