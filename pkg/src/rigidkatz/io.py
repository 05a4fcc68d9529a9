"""Datum and trace files: canonical JSON with exact fraction strings.

Every scalar in a file is written in the power basis of ``Q(zeta_N)`` for
the single conductor ``N`` declared at the top of the file.  Serialization is
canonical (sorted points, sorted blocks, reduced fractions, sorted keys), so
``dumps(loads(text)) == text`` for files written by this module.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Iterable

from .datum import INF, FormalTypeDatum, make_point, point_str
from .errors import NotInvertible, ParseError
from .formal_disk import Block, FormalType
from .puiseux import PhasePart
from .scalars import Scalar, lcm, parse_fraction, totient

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# conductor bookkeeping


def _block_scalars(b: Block) -> Iterable[Scalar]:
    yield b.residue
    for _, c in b.phase.terms:
        yield c


def datum_scalars(d: FormalTypeDatum) -> Iterable[Scalar]:
    for _, v in d.entries:
        for b in v.blocks:
            yield from _block_scalars(b)


def conductor_of(scalars: Iterable[Scalar]) -> int:
    n = 1
    for s in scalars:
        n = lcm(n, s.conductor)
    return n


# ---------------------------------------------------------------------------
# encoding


def scalar_to_json(s: Scalar, n: int) -> dict:
    return {"num": [str(q) for q in Scalar.of(s).lift(n)]}


def block_to_json(b: Block, n: int) -> dict:
    return {
        "ram": b.ram,
        "phase": [{"exp": str(q), "coeff": scalar_to_json(c, n)} for q, c in b.phase.terms],
        "residue": scalar_to_json(b.residue, n),
        "unipotent": b.unipotent,
        "mult": b.mult,
    }


def points_to_json(d: FormalTypeDatum, n: int) -> list:
    return [
        {"point": point_str(p), "type": {"blocks": [block_to_json(b, n) for b in v.blocks]}}
        for p, v in d.entries
    ]


def datum_to_json(d: FormalTypeDatum, metadata: dict | None = None, n: int | None = None) -> dict:
    n = n or conductor_of(datum_scalars(d))
    out = {"schema_version": SCHEMA_VERSION, "conductor": n, "rank": d.rank, "points": points_to_json(d, n)}
    if metadata:
        out["metadata"] = metadata
    return out


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def dumps(d: FormalTypeDatum, metadata: dict | None = None) -> str:
    return canonical_dumps(datum_to_json(d, metadata))


# ---------------------------------------------------------------------------
# decoding


class _Ctx:
    """Carries the raw text so that semantic errors can point at a line and column."""

    def __init__(self, text: str | None):
        self.text = text or ""

    def locate(self, needle: str) -> tuple[int | None, int | None]:
        pos = self.text.find(needle)
        if pos < 0:
            return None, None
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def fail(self, message: str, needle: str | None = None) -> ParseError:
        line, col = self.locate(needle) if needle else (None, None)
        return ParseError(message, line, col)

    def fraction(self, raw: Any) -> Fraction:
        if isinstance(raw, int) and not isinstance(raw, bool):
            return Fraction(raw)
        if not isinstance(raw, str):
            raise self.fail(f"expected a fraction string, got {raw!r}", json.dumps(raw))
        try:
            return parse_fraction(raw)
        except (ValueError, ZeroDivisionError):
            raise self.fail(f"malformed fraction {raw!r}", json.dumps(raw)) from None

    def scalar(self, raw: Any, n: int) -> Scalar:
        if isinstance(raw, (str, int)) and not isinstance(raw, bool):
            return Scalar.of(self.fraction(raw))
        if not isinstance(raw, dict) or "num" not in raw:
            raise self.fail(f"expected a scalar {{\"num\": [...]}}, got {raw!r}")
        coords = [self.fraction(q) for q in raw["num"]]
        if len(coords) != totient(n):
            raise self.fail(f"scalar has {len(coords)} coordinates, conductor {n} needs {totient(n)}")
        return Scalar(coords, n)

    def integer(self, raw: Any, what: str) -> int:
        if not isinstance(raw, int) or isinstance(raw, bool):
            raise self.fail(f"{what} must be an integer, got {raw!r}", f'"{what}"')
        return raw


def _block_from_json(raw: dict, n: int, ctx: _Ctx) -> Block:
    if not isinstance(raw, dict):
        raise ctx.fail(f"block must be an object, got {raw!r}")
    terms = {}
    for term in raw.get("phase", []):
        q = ctx.fraction(term.get("exp"))
        if q >= 0:
            raise ctx.fail(f"phase exponent {q} must be negative", json.dumps(term.get("exp")))
        terms[q] = ctx.scalar(term.get("coeff"), n)
    phase = PhasePart.make(terms)
    residue = ctx.scalar(raw.get("residue", "0"), n)
    unipotent = ctx.integer(raw.get("unipotent", 1), "unipotent")
    mult = ctx.integer(raw.get("mult", 1), "mult")
    if unipotent < 1 or mult < 1:
        raise ctx.fail("unipotent and mult must be positive", '"unipotent"')
    ram = raw.get("ram")
    if ram is not None and ram != phase.ram:
        raise ctx.fail(f"declared ram {ram} but the phase has ramification {phase.ram}", '"ram"')
    return Block.make(phase, residue, unipotent, mult)


def points_from_json(raw: list, n: int, ctx: _Ctx) -> list:
    entries = []
    seen = set()
    for item in raw:
        if not isinstance(item, dict) or "point" not in item:
            raise ctx.fail(f"point entry must have a 'point' key: {item!r}")
        name = item["point"]
        try:
            p = make_point(name) if isinstance(name, str) else make_point(Fraction(name))
        except (ValueError, ZeroDivisionError):
            raise ctx.fail(f"malformed point {name!r}", json.dumps(name)) from None
        key = point_str(p)
        if key in seen:
            raise ctx.fail(f"point {key} listed twice", json.dumps(name))
        seen.add(key)
        blocks = [_block_from_json(b, n, ctx) for b in item.get("type", {}).get("blocks", [])]
        entries.append((p, FormalType.make(blocks)))
    return entries


def datum_from_json(raw: dict, ctx: _Ctx | None = None, n: int | None = None) -> FormalTypeDatum:
    ctx = ctx or _Ctx(None)
    if not isinstance(raw, dict):
        raise ctx.fail("datum must be a JSON object")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ctx.fail(f"unsupported schema_version {version}", '"schema_version"')
    n = ctx.integer(raw.get("conductor", n or 1), "conductor")
    if n < 1:
        raise ctx.fail("conductor must be positive", '"conductor"')
    if "rank" not in raw:
        raise ctx.fail("missing 'rank'")
    rank = ctx.integer(raw["rank"], "rank")
    return FormalTypeDatum.make(rank, points_from_json(raw.get("points", []), n, ctx))


def _json_load(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None


def loads(text: str) -> FormalTypeDatum:
    return datum_from_json(_json_load(text), _Ctx(text))


def loads_with_metadata(text: str) -> tuple[FormalTypeDatum, dict]:
    raw = _json_load(text)
    return datum_from_json(raw, _Ctx(text)), raw.get("metadata", {}) if isinstance(raw, dict) else {}


def load(path) -> FormalTypeDatum:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump(d: FormalTypeDatum, path, metadata: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(d, metadata))


# ---------------------------------------------------------------------------
# operations and traces


def operation_to_json(op, n: int) -> dict:
    from .engine import Operation  # noqa: F401  (type only)

    if op.op == "twist":
        params = {"ell": {"rank": 1, "points": points_to_json(op.params["ell"], n)}}
    elif op.op == "moebius":
        params = op.params["phi"].to_params()
    elif op.op == "fourier":
        params = {"inverse": bool(op.params.get("inverse", False))}
    elif op.op == "mc":
        params = {"lambda": scalar_to_json(op.params["lam"], n)}
    else:
        raise ValueError(f"unknown operation {op.op!r}")
    return {"op": op.op, "params": params}


def operation_from_json(raw: dict, n: int = 1, text: str | None = None):
    from .engine import Operation
    from .transforms import MoebiusMap

    ctx = _Ctx(text)
    if not isinstance(raw, dict) or "op" not in raw:
        raise ctx.fail("operation descriptor must be an object with an 'op' key")
    name = raw["op"]
    params = raw.get("params", {}) or {}
    n = params.get("conductor", n) if isinstance(params, dict) else n
    if name == "twist":
        ell_raw = dict(params.get("ell", {}))
        ell_raw.setdefault("rank", 1)
        ell_raw.setdefault("conductor", n)
        return Operation("twist", {"ell": datum_from_json(ell_raw, ctx).canonical()})
    if name == "moebius":
        try:
            phi = MoebiusMap.from_params(params)
        except (KeyError, ValueError, TypeError, ZeroDivisionError, NotInvertible) as exc:
            raise ctx.fail(f"bad moebius parameters: {exc}") from None
        return Operation("moebius", {"phi": phi})
    if name == "fourier":
        return Operation("fourier", {"inverse": bool(params.get("inverse", False))})
    if name == "mc":
        if "lambda" not in params:
            raise ctx.fail("mc needs a 'lambda' parameter")
        return Operation("mc", {"lam": ctx.scalar(params["lambda"], n)})
    raise ctx.fail(f"unknown operation {name!r}", json.dumps(name))


def operation_loads(text: str):
    return operation_from_json(_json_load(text), text=text)


def _trace_scalars(trace) -> Iterable[Scalar]:
    yield from datum_scalars(trace.initial)
    if trace.terminal is not None:
        yield from datum_scalars(trace.terminal)
    for step in trace.steps:
        yield from datum_scalars(step.ell)
        if step.lam is not None:
            yield step.lam
        for _, b in step.choices:
            yield from _block_scalars(b)


def trace_to_json(trace, verdict: str | None = None) -> dict:
    n = conductor_of(_trace_scalars(trace))
    steps = []
    for step in trace.steps:
        entry = {
            "kind": step.kind,
            "rank_before": step.rank_before,
            "rank_after": step.rank_after,
            "choices": [{"point": point_str(p), "block": block_to_json(b, n)} for p, b in step.choices],
            "ell": {"rank": 1, "points": points_to_json(step.ell, n)},
            "ops": [operation_to_json(op, n) for op in step.operations()],
        }
        if step.lam is not None:
            entry["lambda"] = scalar_to_json(step.lam, n)
        if step.phi is not None:
            entry["phi"] = step.phi.to_params()
        steps.append(entry)
    out = {
        "schema_version": SCHEMA_VERSION,
        "conductor": n,
        "initial": {"rank": trace.initial.rank, "points": points_to_json(trace.initial, n)},
        "terminal": None if trace.terminal is None else {"rank": trace.terminal.rank, "points": points_to_json(trace.terminal, n)},
        "steps": steps,
        "snapshots": list(trace.snapshots),
    }
    if trace.failure:
        out["failure"] = trace.failure
    if verdict:
        out["verdict"] = verdict
    return out


def trace_dumps(trace, verdict: str | None = None) -> str:
    return canonical_dumps(trace_to_json(trace, verdict))


def trace_loads(text: str):
    from .engine import OperationTrace, ReductionStep
    from .transforms import MoebiusMap

    raw = _json_load(text)
    ctx = _Ctx(text)
    if not isinstance(raw, dict) or "initial" not in raw:
        raise ctx.fail("trace file must contain 'initial'")
    n = ctx.integer(raw.get("conductor", 1), "conductor")

    def sub(d):
        return FormalTypeDatum.make(ctx.integer(d["rank"], "rank"), points_from_json(d.get("points", []), n, ctx))

    steps = []
    for s in raw.get("steps", []):
        choices = []
        for c in s.get("choices", []):
            choices.append((make_point(c["point"]), _block_from_json(c["block"], n, ctx)))
        steps.append(ReductionStep(
            kind=s["kind"],
            ell=sub(s["ell"]).canonical(),
            choices=tuple(choices),
            rank_before=s["rank_before"],
            lam=ctx.scalar(s["lambda"], n) if "lambda" in s else None,
            phi=MoebiusMap.from_params(s["phi"]) if "phi" in s else None,
            rank_after=s.get("rank_after"),
        ))
    return OperationTrace(
        initial=sub(raw["initial"]),
        steps=steps,
        terminal=sub(raw["terminal"]) if raw.get("terminal") else None,
        failure=raw.get("failure"),
        snapshots=list(raw.get("snapshots", [])),
    )
