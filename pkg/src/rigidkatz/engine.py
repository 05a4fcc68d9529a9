"""The irregular Katz reduction: step selection, the rank-decreasing loop, replay and verdicts."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .datum import (
    INF,
    FormalTypeDatum,
    Point,
    point_str,
    rigidity_index,
    validate,
)
from .errors import (
    InternalInconsistency,
    InvalidDatum,
    NotRigidInput,
    ReplayMismatch,
)
from .formal_disk import Block, FormalType, min_delta_component
from .scalars import Scalar
from .transforms import (
    MoebiusMap,
    Skyscraper,
    Undefined,
    dual_datum,
    fourier,
    inverse_fourier,
    middle_convolution,
    moebius,
    rank_one_datum,
    twist,
)

log = logging.getLogger(__name__)

TWO_BIG_POINTS = "TwoBigPoints"
CASE_IA = "CaseIa"
RIG_EXCEEDS_TWO = "RigExceedsTwo"
UNDEFINED_STEP = "UndefinedStep"


# ---------------------------------------------------------------------------
# Operations


@dataclass(frozen=True)
class Operation:
    """One of the global operations, with exact parameters.

    ``twist`` takes ``ell`` (a rank-one datum); ``moebius`` takes ``phi``;
    ``fourier`` takes ``inverse`` (bool, meaning ``(-1)^* o ft``); ``mc``
    takes ``lam``.
    """

    op: str
    params: dict = field(default_factory=dict, hash=False, compare=False)

    def apply(self, d: FormalTypeDatum):
        if self.op == "twist":
            return twist(d, self.params["ell"])
        if self.op == "moebius":
            return moebius(d, self.params["phi"])
        if self.op == "fourier":
            return inverse_fourier(d) if self.params.get("inverse") else fourier(d)
        if self.op == "mc":
            return middle_convolution(d, self.params["lam"])
        raise ValueError(f"unknown operation {self.op!r}")

    def inverse(self) -> "Operation":
        if self.op == "twist":
            return Operation("twist", {"ell": dual_datum(self.params["ell"])})
        if self.op == "moebius":
            return Operation("moebius", {"phi": self.params["phi"].inverse()})
        if self.op == "fourier":
            return Operation("fourier", {"inverse": not self.params.get("inverse", False)})
        if self.op == "mc":
            return Operation("mc", {"lam": -Scalar.of(self.params["lam"])})
        raise ValueError(f"unknown operation {self.op!r}")

    def __str__(self) -> str:
        if self.op == "twist":
            return f"twist by {self.params['ell']}"
        if self.op == "moebius":
            p = self.params["phi"]
            return f"moebius z -> ({p.a}z + {p.b})/({p.c}z + {p.d})"
        if self.op == "fourier":
            return "inverse fourier" if self.params.get("inverse") else "fourier"
        return f"middle convolution lambda={self.params['lam']}"


def apply_operations(d: FormalTypeDatum, ops) -> Any:
    for op in ops:
        d = op.apply(d)
        if not isinstance(d, FormalTypeDatum):
            return d
    return d


# ---------------------------------------------------------------------------
# Steps, traces and verdicts


@dataclass(frozen=True)
class ReductionStep:
    kind: str  # "TwistMC" (cases Ib) or "TwistMoebiusFT" (case II)
    ell: FormalTypeDatum
    choices: tuple[tuple[Point, Block], ...]
    rank_before: int
    lam: Scalar | None = None
    phi: MoebiusMap | None = None
    rank_after: int | None = None

    def operations(self) -> list[Operation]:
        ops = []
        if self.kind == "TwistMoebiusFT":
            if self.phi is not None:
                ops.append(Operation("moebius", {"phi": self.phi}))
            ops.append(Operation("twist", {"ell": dual_datum(self.ell)}))
            ops.append(Operation("fourier", {"inverse": False}))
        else:
            ops.append(Operation("twist", {"ell": dual_datum(self.ell)}))
            ops.append(Operation("mc", {"lam": self.lam}))
        return ops

    def inverse_operations(self) -> list[Operation]:
        return [op.inverse() for op in reversed(self.operations())]


@dataclass(frozen=True)
class RankOne:
    pass


@dataclass(frozen=True)
class NoSolutionReason:
    reason: str
    detail: str = ""


@dataclass
class OperationTrace:
    initial: FormalTypeDatum
    steps: list[ReductionStep] = field(default_factory=list)
    terminal: FormalTypeDatum | None = None
    failure: str | None = None
    snapshots: list[dict] = field(default_factory=list)


@dataclass
class Solvable:
    trace: OperationTrace
    verdict: str = "Solvable"

    def certificate(self) -> str:
        lines = [f"terminal rank-one datum: {self.trace.terminal}"]
        if not self.trace.steps:
            lines.append("the datum already has rank one; it is realized by a rank-one connection")
            return "\n".join(lines)
        lines.append("apply, in order:")
        n = 1
        for step in reversed(self.trace.steps):
            for op in step.inverse_operations():
                lines.append(f"  {n}. {op}")
                n += 1
        return "\n".join(lines)


@dataclass
class NoSolution:
    reason: str
    detail: str = ""
    trace: OperationTrace | None = None
    verdict: str = "NoSolution"

    def certificate(self) -> str:
        return f"no solution: {self.reason}" + (f" ({self.detail})" if self.detail else "")


@dataclass
class NotRigid:
    rig: int
    verdict: str = "NotRigid"

    def certificate(self) -> str:
        return f"not rigid: rigidity index {self.rig}"


# ---------------------------------------------------------------------------
# Step selection


def minimizers(d: FormalTypeDatum) -> list[tuple[Point, list[Block]]]:
    """Minimizing components at every listed point and at infinity, in point order."""
    out = [(p, min_delta_component(v)) for p, v in d.entries if p is not INF]
    out.append((INF, min_delta_component(d.type_at(INF))))
    return out


def _big(blocks: list[Block]) -> bool:
    return all(b.rank > 1 for b in blocks)


def _case_two(d: FormalTypeDatum, x0: Point) -> ReductionStep:
    phi = None
    if x0 is not INF:
        phi = MoebiusMap(x0, 1, 1, 0)
        d = moebius(d, phi)
    mins = minimizers(d)
    choices = []
    total = Scalar.of(0)
    for p, blocks in mins:
        if p is INF:
            continue
        b = next(b for b in blocks if b.rank == 1)
        choices.append((p, b))
        total = total + b.residue
    top = mins[-1][1][0]
    if top.rank == 1:
        raise InternalInconsistency("case II without a ramified minimizer at infinity")
    ell_inf = Block.make(top.phase.integer_part(), (-total).mod())
    choices.append((INF, top))
    ell = rank_one_datum([(p, b) for p, b in choices[:-1]] + [(INF, ell_inf)])
    return ReductionStep("TwistMoebiusFT", ell, tuple(choices), d.rank, phi=phi)


def _case_one(d: FormalTypeDatum, mins) -> ReductionStep | NoSolutionReason:
    points = [p for p, _ in mins]
    rank_one = [[b for b in blocks if b.rank == 1] for _, blocks in mins]
    for combo in itertools.product(*rank_one):
        lam = Scalar.of(0)
        for b in combo:
            lam = lam + b.residue
        if lam.is_integer():
            continue
        ell_blocks = []
        for p, b in zip(points, combo):
            if p is INF:
                ell_blocks.append((p, Block.make(b.phase, b.residue - lam)))
            else:
                ell_blocks.append((p, b))
        ell = rank_one_datum(ell_blocks)
        return ReductionStep("TwistMC", ell, tuple(zip(points, combo)), d.rank, lam=lam.mod())
    return NoSolutionReason(CASE_IA, "every minimizer combination has integer residue sum")


def select_step(d: FormalTypeDatum):
    if d.rank == 1:
        return RankOne()
    rig = rigidity_index(d)
    if rig != 2:
        raise NotRigidInput(f"rigidity index {rig} != 2")
    mins = minimizers(d)
    big = [p for p, blocks in mins if _big(blocks)]
    if len(big) >= 2:
        return NoSolutionReason(TWO_BIG_POINTS, "ramified minimizers at " + ", ".join(point_str(p) for p in big))
    if big:
        return _case_two(d, big[0])
    return _case_one(d, mins)


def apply_step(d: FormalTypeDatum, step: ReductionStep):
    return apply_operations(d, step.operations())


# ---------------------------------------------------------------------------
# The loop


def reduce(d: FormalTypeDatum):
    d = d.canonical()
    rig = rigidity_index(d)
    trace = OperationTrace(initial=d)
    if rig > 2:
        return NoSolution(RIG_EXCEEDS_TWO, f"rigidity index {rig}", trace)
    if rig < 2:
        return NotRigid(rig)
    current = d
    trace.snapshots.append({"rank": current.rank, "rig": rig})
    for _ in range(d.rank):
        sel = select_step(current)
        if isinstance(sel, RankOne):
            trace.terminal = current
            return Solvable(trace)
        if isinstance(sel, NoSolutionReason):
            trace.failure = sel.reason
            return NoSolution(sel.reason, sel.detail, trace)
        out = apply_step(current, sel)
        if isinstance(out, Undefined):
            trace.failure = UNDEFINED_STEP
            return NoSolution(UNDEFINED_STEP, str(out), trace)
        if isinstance(out, Skyscraper):
            raise InternalInconsistency("reduction step produced a skyscraper")
        if out.rank >= current.rank:
            raise InternalInconsistency(f"step did not decrease rank ({current.rank} -> {out.rank})")
        new_rig = rigidity_index(out)
        if new_rig != 2:
            raise InternalInconsistency(f"step changed rigidity index to {new_rig}")
        step = ReductionStep(sel.kind, sel.ell, sel.choices, sel.rank_before, sel.lam, sel.phi, out.rank)
        log.debug("step %s: rank %d -> %d", step.kind, current.rank, out.rank)
        trace.steps.append(step)
        trace.snapshots.append({"rank": out.rank, "rig": new_rig})
        current = out
    if current.rank == 1:
        trace.terminal = current
        return Solvable(trace)
    raise InternalInconsistency("reduction did not terminate")


def solve_ds(d: FormalTypeDatum):
    problems = validate(d.canonical())
    if problems:
        raise InvalidDatum(problems)
    return reduce(d)


# ---------------------------------------------------------------------------
# Replay


def _diff(expected: FormalTypeDatum, got) -> tuple[Point | None, str]:
    if not isinstance(got, FormalTypeDatum):
        return None, f"operation returned {got}"
    if expected.rank != got.rank:
        return None, f"rank {got.rank} != {expected.rank}"
    keys = {point_str(p): p for p, _ in expected.entries + got.entries}
    for name in sorted(keys, key=lambda s: (s == "inf", s)):
        p = keys[name]
        a, b = expected.type_at(p), got.type_at(p)
        if a != b:
            return p, f"expected {a}, got {b}"
    return None, "entries differ"


def replay(trace: OperationTrace, direction: str = "backward") -> FormalTypeDatum:
    """Re-run a trace; backward replay must land exactly on the initial datum."""
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    if direction == "forward":
        current = trace.initial
        for i, step in enumerate(trace.steps):
            current = apply_step(current, step)
            if not isinstance(current, FormalTypeDatum) or current.rank != step.rank_after:
                p, msg = (None, f"operation returned {current}") if not isinstance(current, FormalTypeDatum) \
                    else (None, f"rank {current.rank} != recorded {step.rank_after}")
                raise ReplayMismatch(f"forward replay diverged at step {i}: {msg}", step=i, diff=(p, msg))
        target = trace.terminal
        if target is not None and current != target:
            p, msg = _diff(target, current)
            raise ReplayMismatch(f"forward replay ended at a different datum: {msg}", step=len(trace.steps), diff=(p, msg))
        return current
    if trace.terminal is None:
        raise ReplayMismatch("trace has no terminal datum")
    current = trace.terminal
    for i in reversed(range(len(trace.steps))):
        step = trace.steps[i]
        current = apply_operations(current, step.inverse_operations())
        if not isinstance(current, FormalTypeDatum) or current.rank != step.rank_before:
            p, msg = (None, f"operation returned {current}") if not isinstance(current, FormalTypeDatum) \
                else (None, f"rank {current.rank} != recorded {step.rank_before}")
            raise ReplayMismatch(f"backward replay diverged at step {i}: {msg}", step=i, diff=(p, msg))
    if current != trace.initial:
        p, msg = _diff(trace.initial, current)
        raise ReplayMismatch(f"backward replay missed the initial datum at {point_str(p) if p is not None else '?'}: {msg}",
                             step=0, diff=(p, msg))
    return current
