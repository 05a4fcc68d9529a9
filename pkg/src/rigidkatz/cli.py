"""Command-line interface.

Exit codes: 0 ok/solvable, 1 no solution, 2 not rigid, 3 invalid input,
4 internal inconsistency / oracle or replay mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

from . import corpus, io
from .datum import (
    FormalTypeDatum,
    classify_rigidity,
    end_deltas,
    euler_char,
    point_str,
    rigidity_index,
    validate,
)
from .engine import NoSolution, NotRigid, Solvable, replay, solve_ds
from .errors import (
    CoefficientFieldError,
    ConductorTooSmall,
    InternalInconsistency,
    InvalidDatum,
    KatzError,
    OracleMismatch,
    ParseError,
    ReplayMismatch,
    UnknownName,
)
from .formal_disk import invariants
from .oracle import check_invariants
from .transforms import Skyscraper, Undefined

EXIT_OK, EXIT_NO_SOLUTION, EXIT_NOT_RIGID, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2, 3, 4

log = logging.getLogger("rigidkatz")


class Output:
    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.record: dict = {}

    def line(self, text: str) -> None:
        if not self.as_json:
            print(text)

    def error(self, text: str) -> None:
        print(text, file=sys.stderr)

    def finish(self, code: int) -> int:
        if self.as_json:
            self.record.setdefault("exit_code", code)
            print(json.dumps(self.record, indent=2, sort_keys=True, default=str))
        return code


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(path: str, out: Output) -> FormalTypeDatum | None:
    try:
        return io.loads(_read(path))
    except ParseError as exc:
        out.error(f"parse error: {exc}")
        out.record.update({"status": "parse-error", "error": str(exc), "line": exc.line, "column": exc.column})
        return None
    except OSError as exc:
        out.error(f"cannot read {path}: {exc}")
        out.record.update({"status": "io-error", "error": str(exc)})
        return None


def _require_valid(d: FormalTypeDatum, out: Output) -> bool:
    problems = validate(d)
    if problems:
        for v in problems:
            out.error(f"invalid: {v}")
        out.record.update({"status": "invalid", "violations": [str(v) for v in problems]})
        return False
    return True


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, out: Output) -> int:
    d = _load(args.file, out)
    if d is None:
        return EXIT_INVALID
    if not _require_valid(d, out):
        return EXIT_INVALID
    out.record["status"] = "valid"
    out.line("valid")
    return EXIT_OK


def cmd_invariants(args, out: Output) -> int:
    d = _load(args.file, out)
    if d is None or not _require_valid(d, out):
        return EXIT_INVALID
    ends = end_deltas(d)
    points = {}
    for p, v in d.entries:
        inv = invariants(v)
        points[point_str(p)] = {
            "irreg": inv["irreg"],
            "slopes": [str(s) for s in inv["slopes"]],
            "hor": inv["hor"],
            "delta": inv["delta"],
            "delta_end": ends[p],
        }
    rig = rigidity_index(d)
    report = {
        "rank": d.rank,
        "points": points,
        "chi": euler_char(d),
        "rig": rig,
        "chi_end": rig,
        "classification": classify_rigidity(rig),
        "moduli_dimension": 2 - rig if rig <= 2 else None,
    }
    if args.oracle:
        try:
            check_invariants(d)
        except OracleMismatch as exc:
            out.error(f"oracle mismatch: {exc}")
            out.record.update({"status": "oracle-mismatch", "report": report})
            return EXIT_INTERNAL
        report["oracle"] = "agree"
    out.record.update(report)
    out.line(f"rank: {d.rank}")
    for name, info in points.items():
        out.line(f"  {name}: irreg={info['irreg']} slopes=[{', '.join(info['slopes'])}] hor={info['hor']} "
                 f"delta={info['delta']} delta(END)={info['delta_end']}")
    out.line(f"chi: {report['chi']}")
    out.line(f"rig: {rig} ({report['classification']})")
    out.line(f"chi(END): {rig}")
    out.line("moduli dimension: " + (str(report["moduli_dimension"]) if rig <= 2 else "undefined (rig > 2)"))
    if args.oracle:
        out.line("oracle: agree")
    return EXIT_OK


def cmd_reduce(args, out: Output) -> int:
    d = _load(args.file, out)
    if d is None:
        return EXIT_INVALID
    try:
        verdict = solve_ds(d)
    except InvalidDatum as exc:
        for v in exc.violations:
            out.error(f"invalid: {v}")
        out.record.update({"status": "invalid", "violations": [str(v) for v in exc.violations]})
        return EXIT_INVALID
    except (CoefficientFieldError, ConductorTooSmall) as exc:
        out.error(f"rejected: {exc}")
        out.record.update({"status": "rejected", "error": str(exc)})
        return EXIT_INVALID
    out.record["verdict"] = verdict.verdict
    if isinstance(verdict, Solvable):
        out.record["steps"] = len(verdict.trace.steps)
        out.record["ranks"] = [s["rank"] for s in verdict.trace.snapshots]
        out.line(f"Solvable in {len(verdict.trace.steps)} step(s)")
        out.line(verdict.certificate())
        if args.trace:
            _write(io.trace_dumps(verdict.trace, verdict.verdict), args.trace)
            out.line(f"trace written to {args.trace}")
        return EXIT_OK
    if isinstance(verdict, NoSolution):
        out.record.update({"reason": verdict.reason, "detail": verdict.detail})
        out.line(f"NoSolution: {verdict.reason}" + (f" ({verdict.detail})" if verdict.detail else ""))
        return EXIT_NO_SOLUTION
    assert isinstance(verdict, NotRigid)
    dim = 2 - verdict.rig
    out.record.update({"rig": verdict.rig, "moduli_dimension": dim})
    out.line(f"NotRigid{{{verdict.rig}}}")
    out.line(f"moduli dimension: {dim}")
    return EXIT_NOT_RIGID


def cmd_apply(args, out: Output) -> int:
    d = _load(args.file, out)
    if d is None or not _require_valid(d, out):
        return EXIT_INVALID
    try:
        text = _read(args.op[1:]) if args.op.startswith("@") else args.op
        op = io.operation_loads(text)
        result = op.apply(d)
    except ParseError as exc:
        out.error(f"bad operation: {exc}")
        out.record.update({"status": "parse-error", "error": str(exc)})
        return EXIT_INVALID
    except (CoefficientFieldError, ConductorTooSmall, InvalidDatum) as exc:
        out.error(f"rejected: {exc}")
        out.record.update({"status": "rejected", "error": str(exc)})
        return EXIT_INVALID
    except KatzError as exc:
        if isinstance(exc, InternalInconsistency):
            raise
        out.error(f"operation failed: {exc}")
        out.record.update({"status": "error", "error": f"{type(exc).__name__}: {exc}"})
        return EXIT_INVALID
    if isinstance(result, (Skyscraper, Undefined)):
        kind = "skyscraper" if isinstance(result, Skyscraper) else "undefined"
        out.error(f"result is {kind}: {result}")
        out.record.update({"status": kind, "detail": str(result)})
        return EXIT_NO_SOLUTION
    text = io.dumps(result)
    out.record.update({"status": "ok", "datum": json.loads(text)})
    if not out.as_json or args.out:
        _write(text, args.out)
    return EXIT_OK


def cmd_replay(args, out: Output) -> int:
    try:
        trace = io.trace_loads(_read(args.trace))
    except (ParseError, KeyError, TypeError) as exc:
        out.error(f"bad trace: {exc}")
        out.record.update({"status": "parse-error", "error": str(exc)})
        return EXIT_INVALID
    direction = "backward" if args.backward else "forward"
    try:
        result = replay(trace, direction)
    except ReplayMismatch as exc:
        out.error(f"replay mismatch: {exc}")
        out.record.update({"status": "replay-mismatch", "error": str(exc), "step": exc.step})
        return EXIT_INTERNAL
    text = io.dumps(result)
    out.record.update({"status": "ok", "direction": direction, "datum": json.loads(text)})
    if not out.as_json or args.out:
        _write(text, args.out)
    return EXIT_OK


def cmd_corpus(args, out: Output) -> int:
    if args.action == "list":
        out.record["entries"] = []
        for name in corpus.names():
            e = corpus.get(name)
            out.record["entries"].append({"name": name, "description": e.description})
            out.line(f"{name:16s} {e.description}")
        return EXIT_OK
    if not args.name:
        out.error("corpus emit needs a name")
        return EXIT_INVALID
    try:
        entry = corpus.get(args.name)
    except UnknownName as exc:
        out.error(str(exc))
        out.record.update({"status": "unknown-name", "error": str(exc)})
        return EXIT_INVALID
    kw = {}
    meta = entry.metadata()
    if args.lam is not None:
        if "lambda" not in entry.params:
            out.error(f"corpus entry {args.name} takes no --lambda")
            return EXIT_INVALID
        try:
            kw["lam"] = Fraction(args.lam)
        except (ValueError, ZeroDivisionError):
            out.error(f"malformed --lambda {args.lam!r}")
            return EXIT_INVALID
        meta["params"] = {"lambda": str(kw["lam"])}
    text = io.dumps(entry.datum(**kw), meta)
    out.record.update({"status": "ok", "datum": json.loads(text)})
    if not out.as_json or args.out:
        _write(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="rigidkatz", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a datum file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("invariants", parents=[common], help="local and global invariants")
    p.add_argument("file")
    p.add_argument("--oracle", action="store_true", help="cross-check with brute-force conjugate pairs")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("reduce", parents=[common], help="run the Katz reduction")
    p.add_argument("file")
    p.add_argument("--trace", help="write the operation trace here")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("apply", parents=[common], help="apply one operation descriptor")
    p.add_argument("file")
    p.add_argument("--op", required=True, help='JSON descriptor, e.g. \'{"op": "fourier", "params": {}}\' (or @file)')
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("replay", parents=[common], help="replay a trace")
    p.add_argument("trace")
    p.add_argument("--backward", action="store_true", help="rebuild the initial datum from the terminal one")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("corpus", parents=[common], help="built-in examples")
    p.add_argument("action", choices=["list", "emit"])
    p.add_argument("name", nargs="?")
    p.add_argument("--lambda", dest="lam", help="Kummer parameter for 'emit kummer'")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    verbose = getattr(args, "verbose", 0)
    logging.basicConfig(level=logging.DEBUG if verbose > 1 else logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Output(getattr(args, "json", False))
    try:
        code = args.func(args, out)
    except (InternalInconsistency, OracleMismatch, ReplayMismatch) as exc:
        out.error(f"internal inconsistency: {exc}")
        out.record.update({"status": "internal-error", "error": str(exc)})
        code = EXIT_INTERNAL
    return out.finish(code)


if __name__ == "__main__":
    sys.exit(main())
