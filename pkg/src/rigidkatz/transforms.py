"""Global operations on formal type data: twist, Moebius pullback, Fourier, middle convolution.

Conventions
-----------
The Fourier kernel is ``e^{z zhat}``.  A block ``(f, lam)`` stands for the
formal solution ``e^{f} u^{lam}`` in the local coordinate ``u`` (``u = z - x``
at a finite point, ``u = 1/z`` at infinity).  Local transforms are computed
by formal stationary phase on one branch of the ramified cover and the
residue shift of each direction is the one forced by ``ft(K^lam) = K^{-lam}``
and ``ft o ft = (-1)^*``; both identities are exercised by the test-suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .datum import INF, FormalTypeDatum, Point, make_point, point_key, point_str, validate
from .errors import (
    CoefficientFieldError,
    ExcludedTrivialCase,
    IntegerLambda,
    InternalInconsistency,
    InvalidDatum,
    NotInvertible,
    SlopeNotGreaterThanOne,
    TrivialBlock,
)
from .formal_disk import Block, FormalType, tensor_rank_one
from .puiseux import PhasePart, Series, formal_inverse, moebius_change, substitute
from .scalars import Number, Scalar


# ---------------------------------------------------------------------------
# Moebius maps


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class MoebiusMap:
    """``z -> (a z + b) / (c z + d)`` with rational entries."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, _frac(getattr(self, name)))
        if self.a * self.d - self.b * self.c == 0:
            raise NotInvertible("degenerate Moebius matrix")

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def translation(cls, t) -> "MoebiusMap":
        return cls(1, t, 0, 1)

    @classmethod
    def scaling(cls, s) -> "MoebiusMap":
        return cls(s, 0, 0, 1)

    @classmethod
    def inversion(cls) -> "MoebiusMap":
        return cls(0, 1, 1, 0)

    @classmethod
    def negation(cls) -> "MoebiusMap":
        return cls(-1, 0, 0, 1)

    @property
    def matrix(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        return ((self.a, self.b), (self.c, self.d))

    def __call__(self, p) -> Point:
        p = make_point(p)
        if p is INF:
            return INF if self.c == 0 else self.a / self.c
        den = self.c * p + self.d
        return INF if den == 0 else (self.a * p + self.b) / den

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """``self o other``."""
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def same_as(self, other: "MoebiusMap") -> bool:
        """Projective equality of the matrices."""
        return self.a * other.b == self.b * other.a and self.a * other.c == self.c * other.a and \
            self.a * other.d == self.d * other.a and self.b * other.c == self.c * other.b and \
            self.b * other.d == self.d * other.b and self.c * other.d == self.d * other.c

    def to_params(self) -> dict:
        return {"matrix": [[str(self.a), str(self.b)], [str(self.c), str(self.d)]]}

    @classmethod
    def from_params(cls, params: Mapping) -> "MoebiusMap":
        (a, b), (c, d) = params["matrix"]
        return cls(Fraction(a), Fraction(b), Fraction(c), Fraction(d))


def _chart(p: Point) -> MoebiusMap:
    """Local coordinate at p as a function of the global one."""
    return MoebiusMap.inversion() if p is INF else MoebiusMap(1, -p, 0, 1)


def _chart_inverse(p: Point) -> MoebiusMap:
    return MoebiusMap.inversion() if p is INF else MoebiusMap(1, p, 0, 1)


def local_change(phi: MoebiusMap, y: Point) -> tuple[Fraction, Fraction]:
    """``(c, e)`` with ``u = c v / (1 + e v)``, u local at phi(y), v local at y."""
    m = _chart(phi(y)).compose(phi).compose(_chart_inverse(y))
    assert m.b == 0
    return m.a / m.d, m.c / m.d


def pull_block(block: Block, c: Fraction, e: Fraction) -> Block:
    if block.phase.is_zero():
        return block
    order = int(block.slope) + 2
    phase, _ = substitute(block.phase, moebius_change(c, e, order))
    return Block.make(phase, block.residue, block.unipotent, block.mult)


def moebius(d: FormalTypeDatum, phi: MoebiusMap) -> FormalTypeDatum:
    """The pullback ``phi^* D``: the entry at x moves to ``phi^{-1}(x)``."""
    inv = phi.inverse()
    out = []
    for p, v in d.entries:
        y = inv(p)
        c, e = local_change(phi, y)
        out.append((y, FormalType.make(pull_block(b, c, e) for b in v.blocks)))
    return FormalTypeDatum.make(d.rank, out).canonical()


# ---------------------------------------------------------------------------
# Twists


def rank_one_datum(entries: Mapping | list) -> FormalTypeDatum:
    """A global rank-one object given by its rank-one blocks; must pass validate."""
    items = entries.items() if isinstance(entries, Mapping) else entries
    data = FormalTypeDatum.make(1, [(p, FormalType.make([b])) for p, b in items]).canonical()
    problems = validate(data)
    if problems:
        raise InvalidDatum(problems)
    return data


GlobalRankOne = FormalTypeDatum


def kummer_datum(lam: Number) -> FormalTypeDatum:
    """``K^lam``: residue lam at 0 and -lam at infinity."""
    lam = Scalar.of(lam)
    return FormalTypeDatum.make(1, {Fraction(0): [Block.regular(lam)], INF: [Block.regular(-lam)]}).canonical()


def dual_datum(d: FormalTypeDatum) -> FormalTypeDatum:
    return FormalTypeDatum.make(d.rank, [(p, v.dual()) for p, v in d.entries]).canonical()


def twist(d: FormalTypeDatum, ell: FormalTypeDatum) -> FormalTypeDatum:
    """Pointwise ``V_x (x) ell_x``."""
    if ell.rank != 1:
        raise ValueError("twist expects a rank-one datum")
    problems = validate(ell.canonical())
    if problems:
        raise InvalidDatum(problems)
    points = {point_key(p): p for p, _ in d.entries + ell.entries}
    out = []
    for key in sorted(points):
        p = points[key]
        lb = ell.type_at(p).blocks[0]
        out.append((p, tensor_rank_one(d.type_at(p), lb)))
    return FormalTypeDatum.make(d.rank, out).canonical()


@dataclass(frozen=True)
class KummerParam:
    lam: Scalar

    @classmethod
    def make(cls, lam: Number) -> "KummerParam":
        lam = Scalar.of(lam)
        if lam.is_integer():
            raise IntegerLambda(f"Kummer parameter {lam} is an integer")
        return cls(lam)


# ---------------------------------------------------------------------------
# Local Fourier transforms


def _split(phase: PhasePart, residue: Scalar, rho: int, unipotent: int, mult: int) -> list[Block]:
    """Blocks of ``Ind_rho(e^phase u^residue)`` when phase may have a smaller ramification."""
    step = rho // phase.ram
    return [Block.make(phase, residue + Fraction(j, rho), unipotent, mult) for j in range(step)]


def _stationary_phase(f: PhasePart, sigma: int, precision_pad: int = 1) -> tuple[PhasePart, int, Fraction]:
    """Principal part of ``f(t) + X(t) tau^m`` at the critical point.

    With ``t^r`` the input coordinate and ``X = t^{sigma r}`` the variable
    paired with the dual one, the critical-point equation is
    ``G(t) = -sigma sum q a_q t^{qr - sigma r} = tau^m``; it is solved with
    ``formal_inverse`` and the output phase is re-expressed in ``tau^rho``
    where ``rho = |m|``.  Returns ``(phase, rho, slope)``.
    """
    r = f.ram
    a = {int(q * r): c for q, c in f.terms}
    k = -min(a)
    g_poly = {n - sigma * r: c * (Fraction(-sigma * n, r)) for n, c in a.items()}
    m = min(g_poly)
    rho = abs(m)
    t = formal_inverse(g_poly, m, precision=k + precision_pad)
    total = Series({}, t.prec + 10)
    for n, c in a.items():
        total = total + t.int_power(n).scale(c)
    x = t.int_power(sigma * r) if sigma > 0 else t.power(Fraction(-r))
    total = total + x.shift(m)
    if total.prec <= 0:
        raise InternalInconsistency("stationary phase lost the principal part")
    terms = {Fraction(e, rho): c for e, c in total.terms.items() if e < 0}
    return PhasePart.make(terms), rho, Fraction(k, r)


def _horizontal_quotient(block: Block) -> Block | None:
    """``B / B^hor``: a unipotent Jordan block loses one from its size."""
    if not block.is_horizontal_type():
        return block
    if block.unipotent == 1:
        return None
    return Block(block.phase, block.residue, block.unipotent - 1, block.mult)


def local_fourier_finite(x, block: Block) -> list[Block]:
    """Blocks at infinity of the dual line coming from a block at the finite point x."""
    x = make_point(x)
    if block.is_trivial():
        raise TrivialBlock("local Fourier of a trivial block")
    b = _horizontal_quotient(block)
    if b is None:
        return []
    lam = b.residue
    linear = PhasePart.monomial(x, -1) if x != 0 else PhasePart()
    if b.phase.is_zero():
        return [Block.make(linear, lam + 1, b.unipotent, b.mult)]
    g, rho, s = _stationary_phase(b.phase, +1)
    res = (lam * 2 + 2 + s) / (2 * (s + 1))
    return _split(g + linear, res, rho, b.unipotent, b.mult)


def local_fourier_infty(block: Block) -> list[Block]:
    """Dual-infinity blocks coming from a block at infinity of slope > 1."""
    s = block.slope
    if s <= 1:
        raise SlopeNotGreaterThanOne(f"slope {s} is not greater than one")
    g, rho, s = _stationary_phase(block.phase, -1)
    res = (block.residue * 2 + s - 2) / (2 * (s - 1))
    return _split(g, res, rho, block.unipotent, block.mult)


def local_fourier_to_point(block: Block) -> tuple[Fraction, list[Block]]:
    """A block at infinity of slope <= 1 lands at a finite dual point ``yhat``.

    Returns ``(yhat, blocks)`` where the blocks describe the vanishing part
    at ``yhat``; horizontal padding is added by :func:`fourier`.
    """
    if block.slope > 1:
        raise ValueError("block of slope > 1 has no finite dual point")
    terms = block.phase.as_dict()
    c = terms.pop(Fraction(-1), Scalar.of(0))
    if not c.is_rational():
        raise CoefficientFieldError(f"dual singular point {-c} is not rational")
    y = -c.as_fraction()
    rest = PhasePart.make(terms)
    if rest.is_zero():
        if block.ram != 1:
            raise InternalInconsistency("ramified block with linear phase only")
        return y, [Block.make(PhasePart(), block.residue - 1, block.unipotent, block.mult)]
    g, rho, s = _stationary_phase(rest, -1)
    res = (block.residue * 2 - 2 + s) / (2 * (1 - s))
    return y, _split(g, res, rho, block.unipotent, block.mult)


# ---------------------------------------------------------------------------
# Global Fourier transform


@dataclass(frozen=True)
class Skyscraper:
    """The transform is supported at a single point: no generic rank."""

    reason: str = "rank zero"


@dataclass(frozen=True)
class Undefined:
    """Local data incompatible with any global object (negative padding)."""

    point: Point | None = None
    reason: str = ""

    def __str__(self) -> str:
        where = f" at {point_str(self.point)}" if self.point is not None else ""
        return f"undefined{where}: {self.reason}"


def fourier_rank(d: FormalTypeDatum) -> int:
    total = sum(v.delta for p, v in d.entries if p is not INF)
    big = d.type_at(INF).above_one()
    return total + big.irreg - big.rank


def fourier(d: FormalTypeDatum):
    """Formal type datum of the Fourier transform, or Skyscraper / Undefined."""
    rank = fourier_rank(d)
    if rank <= 0:
        return Skyscraper("rank zero" if rank == 0 else f"negative rank {rank}")
    at_inf: list[Block] = []
    for p, v in d.finite_entries():
        for b in v.blocks:
            if not b.is_trivial():
                at_inf.extend(local_fourier_finite(p, b))
    vinf = d.type_at(INF)
    vanishing: dict = {}
    for b in vinf.blocks:
        if b.slope > 1:
            at_inf.extend(local_fourier_infty(b))
        else:
            y, blocks = local_fourier_to_point(b)
            vanishing.setdefault(y, []).extend(blocks)
    inf_type = FormalType.make(at_inf)
    if inf_type.rank != rank:
        raise InternalInconsistency(f"dual infinity has rank {inf_type.rank}, expected {rank}")
    entries: list = [(INF, inf_type)]
    for y in sorted(vanishing):
        q = vanishing[y]
        full = []
        used = 0
        for b in q:
            if b.is_horizontal_type():
                full.append(Block(b.phase, b.residue, b.unipotent + 1, b.mult))
                used += (b.unipotent + 1) * b.mult
            else:
                full.append(b)
                used += b.rank
        pad = rank - used
        if pad < 0:
            return Undefined(y, f"vanishing part needs rank {used} > {rank}")
        if pad:
            full.append(Block.regular(0, 1, pad))
        entries.append((y, FormalType.make(full)))
    return FormalTypeDatum.make(rank, entries).canonical()


def inverse_fourier(d: FormalTypeDatum):
    out = fourier(d)
    if isinstance(out, FormalTypeDatum):
        return moebius(out, MoebiusMap.negation())
    return out


def mc_rank(d: FormalTypeDatum, lam: Number) -> int:
    total = sum(v.delta for p, v in d.entries if p is not INF)
    shifted = tensor_rank_one(d.type_at(INF), Block.regular(-Scalar.of(lam)))
    return total + shifted.delta - d.rank


def is_excluded_shape(d: FormalTypeDatum) -> bool:
    """Rank one and either trivial or with (at most) two regular singular points."""
    if d.rank != 1:
        return False
    pts = d.canonical().entries
    return len(pts) <= 2 and all(b.phase.is_zero() for _, v in pts for b in v.blocks)


def middle_convolution(d: FormalTypeDatum, lam: Number):
    """``MC_lam(D) = ft^{-1}(ft(D) (x) K^{-lam})``."""
    param = KummerParam.make(lam)
    if is_excluded_shape(d):
        raise ExcludedTrivialCase("rank one with at most two regular singular points")
    f = fourier(d)
    if not isinstance(f, FormalTypeDatum):
        return f if isinstance(f, Undefined) else Undefined(None, "Fourier transform is a skyscraper")
    twisted = twist(f, kummer_datum(-param.lam))
    out = inverse_fourier(twisted)
    if not isinstance(out, FormalTypeDatum):
        return out if isinstance(out, Undefined) else Undefined(None, "inverse Fourier is a skyscraper")
    expected = mc_rank(d, param.lam)
    if out.rank != expected:
        raise InternalInconsistency(f"middle convolution rank {out.rank} != closed formula {expected}")
    return out
