"""Seeded random generators for formal types, data and operation sequences.

Used by the property tests and by the searches that produced the negative
corpus examples.  Coefficients live in Q(zeta_12) so every conductor that
appears stays at most 24 even after Galois conjugation.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .datum import INF, FormalTypeDatum, block_detres
from .errors import KatzError
from .formal_disk import Block, FormalType
from .puiseux import PhasePart
from .scalars import Scalar
from .transforms import MoebiusMap, Skyscraper, Undefined, fourier, middle_convolution, moebius, rank_one_datum, twist

SMALL_POINTS = [Fraction(0), Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 2), INF]


def random_fraction(rng: random.Random, max_den: int = 7, lo: int = -2, hi: int = 2) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(lo * den, hi * den), den)


def random_coeff(rng: random.Random, cyclotomic: bool = True) -> Scalar:
    c = Scalar.of(0)
    while c.is_zero():
        c = Scalar.of(random_fraction(rng, 3))
        if cyclotomic and rng.random() < 0.3:
            c = c * Scalar.root_of_unity(12, rng.randrange(12))
    return c


def random_phase(rng: random.Random, ram: int, max_slope: int = 3, cyclotomic: bool = True) -> PhasePart:
    """A phase whose ramification is exactly ``ram`` (zero when ram is 1 and by chance)."""
    while True:
        top = rng.randint(1, max_slope * ram)
        terms = {}
        for n in range(1, top + 1):
            if n == top or rng.random() < 0.4:
                terms[Fraction(-n, ram)] = random_coeff(rng, cyclotomic)
        f = PhasePart.make(terms)
        if f.ram == ram:
            return f


def random_block(rng: random.Random, max_rank: int, max_ram: int = 3, irregular: float = 0.5,
                 cyclotomic: bool = True, max_slope: int = 3) -> Block:
    ram = rng.randint(1, max(1, min(max_ram, max_rank)))
    if ram == 1 and rng.random() > irregular:
        phase = PhasePart()
    else:
        phase = random_phase(rng, ram, max_slope, cyclotomic)
    room = max_rank // ram
    unip = rng.randint(1, min(2, room))
    mult = rng.randint(1, max(1, min(2, room // unip)))
    return Block.make(phase, random_fraction(rng, 6, 0, 1), unip, mult)


def random_type(rng: random.Random, rank: int, **kw) -> FormalType:
    blocks = []
    left = rank
    while left:
        b = random_block(rng, left, **kw)
        blocks.append(b)
        left -= b.rank
    return FormalType.make(blocks)


def random_irreducible(rng: random.Random, max_rank: int = 4, **kw) -> Block:
    b = random_block(rng, max_rank, **kw)
    return Block.make(b.phase, b.residue)


def _fix_determinant(entries: list) -> list:
    total = Scalar.of(0)
    for _, v in entries:
        for b in v.blocks:
            total = total + block_detres(b)
    gap = total - total.mod()
    frac = total - gap
    if frac.is_zero():
        return entries
    p, v = entries[-1]
    blocks = list(v.blocks)
    last = blocks[-1]
    weight = last.mult * last.unipotent * last.ram
    blocks[-1] = Block.make(last.phase, last.residue - frac / weight, last.unipotent, last.mult)
    entries[-1] = (p, FormalType.make(blocks))
    return entries


def random_datum(rng: random.Random, max_rank: int = 4, max_points: int = 3, **kw) -> FormalTypeDatum:
    """A valid datum with random local types (not necessarily rigid)."""
    rank = rng.randint(1, max_rank)
    pts = rng.sample(SMALL_POINTS, rng.randint(1, max_points))
    entries = [(p, random_type(rng, rank, **kw)) for p in pts]
    entries = _fix_determinant(entries)
    return FormalTypeDatum.make(rank, entries).canonical()


def random_rank_one(rng: random.Random, max_points: int = 4, irregular: float = 0.3, max_slope: int = 1,
                    coeffs: tuple = (1, -1)) -> FormalTypeDatum:
    """Random global rank-one datum; irregular phases are polynomials in 1/u of degree <= max_slope."""
    pts = rng.sample(SMALL_POINTS, rng.randint(1, max_points))
    blocks = []
    for p in pts:
        phase = PhasePart()
        if rng.random() < irregular:
            phase = PhasePart.make({Fraction(-n): Scalar.of(rng.choice(coeffs))
                                    for n in range(1, rng.randint(1, max_slope) + 1)})
        blocks.append([p, Block.make(phase, random_fraction(rng, 6, 0, 1))])
    total = sum((b.residue for _, b in blocks), Scalar.of(0))
    p, b = blocks[-1]
    blocks[-1] = [p, Block.make(b.phase, b.residue - total.mod())]
    return rank_one_datum([(p, b) for p, b in blocks])


# Maps fixing infinity: ramified blocks created at infinity by Fourier stay
# there, so the reduction never has to transform them from a finite point
# (which can need radicals outside every cyclotomic field).
SAFE_MOEBIUS = [
    MoebiusMap.translation(1),
    MoebiusMap.translation(-1),
    MoebiusMap.negation(),
    MoebiusMap.translation(Fraction(1, 2)),
]


def random_operation(rng: random.Random):
    from .engine import Operation

    kind = rng.choice(["twist", "moebius", "fourier", "mc", "mc"])
    if kind == "twist":
        return Operation("twist", {"ell": random_rank_one(rng)})
    if kind == "moebius":
        return Operation("moebius", {"phi": rng.choice(SAFE_MOEBIUS)})
    if kind == "fourier":
        return Operation("fourier", {"inverse": False})
    lam = random_fraction(rng, 7, 0, 1)
    while lam.denominator == 1:
        lam = random_fraction(rng, 7, 0, 1)
    return Operation("mc", {"lam": lam})


def random_synthesis(rng: random.Random, max_len: int = 4, max_rank: int = 6, attempts: int = 50):
    """Forward-apply random operations to a random rank-one datum.

    Returns ``(start, ops, result)``; operations whose output is a skyscraper,
    undefined, leaves the cyclotomic world, or would exceed ``max_rank`` are
    resampled.
    """
    start = random_rank_one(rng)
    ops = []
    current = start
    length = rng.randint(1, max_len)
    tries = 0
    while len(ops) < length and tries < attempts:
        tries += 1
        op = random_operation(rng)
        try:
            out = op.apply(current)
        except KatzError:
            continue
        if isinstance(out, (Skyscraper, Undefined)) or out.rank > max_rank:
            continue
        ops.append(op)
        current = out
    return start, ops, current
