"""Global formal type data on the projective line."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import NonIntegralIrregularity, RamifiedChoice, RigTooLarge
from .formal_disk import Block, FormalType, end
from .scalars import ResidueClass, Scalar, parse_fraction


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
Point = Union[Fraction, _Infinity]


def make_point(p) -> Point:
    if p is INF or (isinstance(p, str) and p.strip() == "inf"):
        return INF
    if isinstance(p, str):
        return parse_fraction(p)
    return Fraction(p)


def point_key(p: Point) -> tuple:
    return (1, Fraction(0)) if p is INF else (0, p)


def point_str(p: Point) -> str:
    return "inf" if p is INF else str(p)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    point: Point | None = None

    def __str__(self) -> str:
        where = f" at {point_str(self.point)}" if self.point is not None else ""
        return f"{self.kind}{where}: {self.message}"


@dataclass(frozen=True)
class FormalTypeDatum:
    """Formal types at finitely many points; every other point is trivial of rank ``rank``."""

    rank: int
    entries: tuple[tuple[Point, FormalType], ...] = ()

    @classmethod
    def make(cls, rank: int, entries: Mapping | Iterable = ()) -> "FormalTypeDatum":
        items = entries.items() if isinstance(entries, Mapping) else entries
        acc: dict = {}
        for p, v in items:
            p = make_point(p)
            if not isinstance(v, FormalType):
                v = FormalType.make(v)
            acc[p] = v
        return cls(rank, tuple(sorted(acc.items(), key=lambda kv: point_key(kv[0]))))

    def canonical(self) -> "FormalTypeDatum":
        return FormalTypeDatum(self.rank, tuple((p, v) for p, v in self.entries if not v.is_trivial()))

    @property
    def points(self) -> list[Point]:
        return [p for p, _ in self.entries]

    def type_at(self, p) -> FormalType:
        p = make_point(p)
        for q, v in self.entries:
            if q == p and (q is INF) == (p is INF):
                return v
        return FormalType.trivial(self.rank)

    def finite_entries(self) -> list[tuple[Fraction, FormalType]]:
        return [(p, v) for p, v in self.entries if p is not INF]

    def singular_points(self) -> list[Point]:
        return [p for p, v in self.entries if not v.is_trivial()]

    def __str__(self) -> str:
        body = "; ".join(f"{point_str(p)}: {v}" for p, v in self.entries)
        return f"rank {self.rank} {{{body}}}"


def block_detres(b: Block) -> Scalar:
    """Residue of the determinant of a block, including the (r-1)/2 ramification shift."""
    r = b.ram
    return (b.residue * r + Fraction(r - 1, 2)) * (b.mult * b.unipotent)


def detres(v: FormalType) -> Scalar:
    total = Scalar.of(0)
    for b in v.blocks:
        total = total + block_detres(b)
    return total


def validate(d: FormalTypeDatum) -> list[Violation]:
    out: list[Violation] = []
    if d.rank < 1:
        out.append(Violation("rank", f"rank must be positive, got {d.rank}"))
    seen = set()
    total = Scalar.of(0)
    for p, v in d.entries:
        key = point_key(p)
        if key in seen:
            out.append(Violation("duplicate-point", "point listed twice", p))
        seen.add(key)
        if v.rank != d.rank:
            out.append(Violation("constant-rank", f"constant-rank violated: type has rank {v.rank}, datum rank {d.rank}", p))
        try:
            v.irreg
        except NonIntegralIrregularity as exc:
            out.append(Violation("irregularity", str(exc), p))
        for b in v.blocks:
            if b.ram > 1 and b.phase.is_zero():
                out.append(Violation("primitivity", "ramified block with zero phase", p))
        total = total + detres(v)
    if not total.is_integer():
        out.append(Violation("determinant", f"determinant residue sum {total} is not an integer"))
    return out


def is_valid(d: FormalTypeDatum) -> bool:
    return not validate(d)


def euler_char(d: FormalTypeDatum) -> int:
    return 2 * d.rank - sum(v.delta for _, v in d.entries)


def end_datum(d: FormalTypeDatum) -> FormalTypeDatum:
    return FormalTypeDatum.make(d.rank**2, [(p, end(v)) for p, v in d.entries])


def end_deltas(d: FormalTypeDatum) -> dict:
    return {p: end(v).delta for p, v in d.entries}


def rigidity_index(d: FormalTypeDatum) -> int:
    return 2 * d.rank**2 - sum(end_deltas(d).values())


def classify_rigidity(rig: int) -> str:
    if rig == 2:
        return "rigid-candidate"
    if rig == 0:
        return "rigidity-zero"
    if rig > 2:
        return "overdetermined"
    return "underdetermined"


def moduli_dimension(d: FormalTypeDatum) -> int:
    rig = rigidity_index(d)
    if rig > 2:
        raise RigTooLarge(f"rigidity index {rig} exceeds 2")
    return 2 - rig


def twist_residue_gap(choices: Mapping) -> ResidueClass:
    """Class mod Z of the residue sum of rank-one choices; zero iff a global twist exists."""
    total = Scalar.of(0)
    for p, comp in choices.items():
        if comp.ram != 1:
            raise RamifiedChoice(f"choice at {point_str(make_point(p))} is ramified")
        total = total + comp.residue
    return ResidueClass(total)
