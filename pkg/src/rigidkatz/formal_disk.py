"""Formal types on a punctured disk: Levelt-Turrittin blocks and their calculus."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable

from .errors import NonIntegralIrregularity
from .puiseux import PhasePart
from .scalars import Number, Scalar, lcm


@dataclass(frozen=True)
class Block:
    """``mult`` copies of Ind(e^phase) tensored with a Jordan block J(residue, unipotent).

    The residue is measured in ``dz/z`` units on the ramified cover, so it is
    only defined modulo ``1/ram``; the stored value is the representative
    whose rational constant lies in ``[0, 1/ram)``.
    """

    phase: PhasePart = field(default_factory=PhasePart)
    residue: Scalar = field(default_factory=lambda: Scalar.of(0))
    unipotent: int = 1
    mult: int = 1

    @classmethod
    def make(cls, phase: PhasePart | None = None, residue: Number = 0, unipotent: int = 1, mult: int = 1) -> "Block":
        phase = (phase or PhasePart()).canonical
        if unipotent < 1 or mult < 1:
            raise ValueError("unipotent size and multiplicity must be positive")
        residue = Scalar.of(residue).mod(Fraction(1, phase.ram))
        return cls(phase, residue, unipotent, mult)

    @classmethod
    def regular(cls, residue: Number = 0, unipotent: int = 1, mult: int = 1) -> "Block":
        return cls.make(PhasePart(), residue, unipotent, mult)

    @property
    def ram(self) -> int:
        return self.phase.ram

    @property
    def slope(self) -> Fraction:
        return self.phase.slope()

    @property
    def rank(self) -> int:
        return self.ram * self.unipotent * self.mult

    @property
    def irreg(self) -> Fraction:
        return self.rank * self.slope

    def is_trivial(self) -> bool:
        return self.phase.is_zero() and self.residue.is_zero() and self.unipotent == 1

    def is_horizontal_type(self) -> bool:
        return self.phase.is_zero() and self.residue.is_zero()

    @property
    def hor(self) -> int:
        return self.mult if self.is_horizontal_type() else 0

    def component(self) -> "Block":
        """The irreducible subquotient (unipotent size one, multiplicity one)."""
        return Block(self.phase, self.residue, 1, 1)

    def with_mult(self, mult: int) -> "Block":
        return Block(self.phase, self.residue, self.unipotent, mult)

    def identity_key(self) -> tuple:
        return (self.phase, self.residue, self.unipotent)

    def sort_key(self) -> tuple:
        return (self.ram, self.slope, self.phase.sort_key(), self.residue.sort_key(), self.unipotent, self.mult)

    def dual(self) -> "Block":
        return Block.make(-self.phase, -self.residue, self.unipotent, self.mult)

    def __str__(self) -> str:
        extra = f", J{self.unipotent}" if self.unipotent > 1 else ""
        mult = f" x{self.mult}" if self.mult > 1 else ""
        return f"[r={self.ram}, phase={self.phase}, res={self.residue}{extra}]{mult}"


@dataclass(frozen=True)
class FormalType:
    """A multiset of blocks in canonical order; the isomorphism class of a formal connection."""

    blocks: tuple[Block, ...] = ()

    @classmethod
    def make(cls, blocks: Iterable[Block]) -> "FormalType":
        merged: dict[tuple, int] = {}
        reps: dict[tuple, Block] = {}
        for b in blocks:
            key = b.identity_key()
            merged[key] = merged.get(key, 0) + b.mult
            reps.setdefault(key, b)
        out = [reps[k].with_mult(m) for k, m in merged.items()]
        return cls(tuple(sorted(out, key=Block.sort_key)))

    @classmethod
    def trivial(cls, rank: int) -> "FormalType":
        return cls.make([Block.regular(0, 1, rank)]) if rank else cls()

    @cached_property
    def rank(self) -> int:
        return sum(b.rank for b in self.blocks)

    @cached_property
    def irreg(self) -> int:
        total = sum((b.irreg for b in self.blocks), Fraction(0))
        if total.denominator != 1:
            raise NonIntegralIrregularity(f"irregularity {total} is not an integer")
        return int(total)

    @cached_property
    def hor(self) -> int:
        return sum(b.hor for b in self.blocks)

    @cached_property
    def delta(self) -> int:
        return self.irreg + self.rank - self.hor

    def is_trivial(self) -> bool:
        return all(b.is_trivial() for b in self.blocks)

    def slopes(self) -> list[Fraction]:
        out = []
        for b in self.blocks:
            out.extend([b.slope] * b.rank)
        return sorted(out)

    def part(self, predicate) -> "FormalType":
        return FormalType.make(b for b in self.blocks if predicate(b))

    def above_one(self) -> "FormalType":
        """The maximal submodule whose components all have slope greater than one."""
        return self.part(lambda b: b.slope > 1)

    def __add__(self, other: "FormalType") -> "FormalType":
        return FormalType.make(self.blocks + other.blocks)

    def dual(self) -> "FormalType":
        return FormalType.make(b.dual() for b in self.blocks)

    def __str__(self) -> str:
        return " + ".join(str(b) for b in self.blocks) or "0"


def invariants(v: FormalType) -> dict:
    return {
        "rank": v.rank,
        "irreg": v.irreg,
        "slopes": v.slopes(),
        "hor": v.hor,
        "delta": v.delta,
    }


def _jordan_tensor(u1: int, u2: int) -> list[int]:
    return [u1 + u2 + 1 - 2 * s for s in range(1, min(u1, u2) + 1)]


def hom_blocks(b1: Block, b2: Block) -> list[Block]:
    """Blocks of HOM(b1, b2) = b2 (x) b1^dual, by Galois-orbit descent of conjugate pairs."""
    r1, r2 = b1.ram, b2.ram
    l = lcm(r1, r2)
    out = []
    jordans = _jordan_tensor(b1.unipotent, b2.unipotent)
    mult = b1.mult * b2.mult
    base_res = b2.residue - b1.residue
    for j in range(gcd(r1, r2)):
        diff = b2.phase.conjugate(j, r2) - b1.phase
        rho = diff.ram
        for k in range(l // rho):
            res = base_res + Fraction(k, l)
            for u in jordans:
                out.append(Block.make(diff, res, u, mult))
    return out


def hom(v: FormalType, w: FormalType) -> FormalType:
    blocks = []
    for b1 in v.blocks:
        for b2 in w.blocks:
            blocks.extend(hom_blocks(b1, b2))
    return FormalType.make(blocks)


def end(v: FormalType) -> FormalType:
    return hom(v, v)


def tensor_rank_one(v: FormalType, ell: Block) -> FormalType:
    if ell.rank != 1:
        raise ValueError("tensor_rank_one expects a rank-one block")
    return FormalType.make(
        Block.make(b.phase + ell.phase, b.residue + ell.residue, b.unipotent, b.mult) for b in v.blocks
    )


def components(v: FormalType) -> list[Block]:
    seen = {}
    for b in v.blocks:
        c = b.component()
        seen.setdefault(c.identity_key(), c)
    return sorted(seen.values(), key=Block.sort_key)


def delta_ratio(component: Block, v: FormalType) -> Fraction:
    return Fraction(hom(FormalType.make([component]), v).delta, component.rank)


def min_delta_component(v: FormalType) -> list[Block]:
    """All irreducible components minimizing delta(HOM(V', V)) / rk V', in tie-break order."""
    scored = [(delta_ratio(c, v), c) for c in components(v)]
    best = min(s for s, _ in scored)
    return [c for s, c in scored if s == best]


def best_rank_one_approx(component: Block) -> Block:
    """Rank-one block whose phase keeps the integer-exponent terms; residue left at zero."""
    return Block.make(component.phase.integer_part(), 0)
