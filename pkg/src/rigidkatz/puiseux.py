"""Finite Puiseux phases and the truncated series they are computed with.

A phase ``f`` is a finite sum ``sum c_q z^q`` with negative rational
exponents; the exponential factor of a formal block is ``e^f``.  Storing the
phase rather than the form ``df`` turns the pairwise irregularity quantity
into ``max(-ord(f_i - f_j), 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import InsufficientPrecision, NoDominantTerm, NotInvertible
from .scalars import Number, Scalar, lcm, nth_root


def _binom(q: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out = out * (q - i) / (i + 1)
    return out


class Series:
    """Truncated Laurent series in one uniformizer: terms known for exponents < prec."""

    __slots__ = ("terms", "prec")

    def __init__(self, terms: Mapping[int, Number], prec: int):
        self.prec = prec
        self.terms = {}
        for e, c in terms.items():
            if e < prec:
                c = Scalar.of(c)
                if not c.is_zero():
                    self.terms[e] = c

    @classmethod
    def one(cls, prec: int) -> "Series":
        return cls({0: 1}, prec)

    def valuation(self) -> int:
        return min(self.terms) if self.terms else self.prec

    def leading(self) -> Scalar:
        return self.terms[self.valuation()]

    def __add__(self, other: "Series") -> "Series":
        prec = min(self.prec, other.prec)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return Series(out, prec)

    def __neg__(self) -> "Series":
        return Series({e: -c for e, c in self.terms.items()}, self.prec)

    def __sub__(self, other: "Series") -> "Series":
        return self + (-other)

    def scale(self, c: Number) -> "Series":
        c = Scalar.of(c)
        return Series({e: v * c for e, v in self.terms.items()}, self.prec)

    def shift(self, k: int) -> "Series":
        return Series({e + k: c for e, c in self.terms.items()}, self.prec + k)

    def __mul__(self, other: "Series") -> "Series":
        va, vb = self.valuation(), other.valuation()
        prec = min(self.prec + vb, other.prec + va)
        out: dict[int, Scalar] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                if e < prec:
                    out[e] = out[e] + c1 * c2 if e in out else c1 * c2
        return Series(out, prec)

    def unit_power(self, q: Fraction) -> "Series":
        """(1 + h)^q for a series 1 + h with h of positive valuation."""
        if self.terms.get(0) != 1 or any(e < 0 for e in self.terms):
            raise NotInvertible("unit_power needs a series of the form 1 + O(t)")
        h = self - Series.one(self.prec)
        result = Series.one(self.prec)
        power = Series.one(self.prec)
        k = 0
        while True:
            k += 1
            power = power * h
            if power.valuation() >= self.prec:
                break
            result = result + power.scale(_binom(q, k))
        return result

    def power(self, q: Fraction) -> "Series":
        """s^q for s = c t^v (1 + h); needs v*q integral."""
        q = Fraction(q)
        v = self.valuation()
        if v >= self.prec:
            raise NoDominantTerm("power of a series with no known leading term")
        if (v * q).denominator != 1:
            raise InsufficientPrecision(f"t^{v * q} is not a Laurent monomial")
        c = self.leading()
        unit = self.shift(-v).scale(c.inverse())
        cq = nth_root(c, q.denominator) ** q.numerator
        return unit.unit_power(q).scale(cq).shift(int(v * q))

    def int_power(self, n: int) -> "Series":
        if n >= 0:
            result = Series.one(self.prec - self.valuation() + n * self.valuation())
            base = self
            for _ in range(n):
                result = result * base
            return result
        return self.power(Fraction(n))

    def coefficient(self, e: int) -> Scalar:
        if e >= self.prec:
            raise InsufficientPrecision(f"coefficient {e} beyond precision {self.prec}")
        return self.terms.get(e, Scalar.of(0))

    def __repr__(self) -> str:
        body = " + ".join(f"({c})t^{e}" for e, c in sorted(self.terms.items()))
        return f"Series({body or 0} + O(t^{self.prec}))"


def evaluate_laurent(poly: Mapping[int, Scalar], t: Series) -> Series:
    """Substitute a series t into a finite Laurent polynomial sum c_e t^e."""
    total: Series | None = None
    for e, c in poly.items():
        term = t.int_power(e).scale(c)
        total = term if total is None else total + term
    return total if total is not None else Series({}, t.prec)


def formal_inverse(g: Mapping[int, Number], m: int | None = None, precision: int = 4) -> Series:
    """Solve ``g(t) = tau^m`` for ``t`` as a series in ``tau``.

    ``g`` is a finite Laurent polynomial ``{exponent: coeff}`` whose lowest
    term ``a t^m`` dominates.  The returned series has ``precision`` correct
    terms past its leading one; the result is checked by back-substitution.
    """
    poly = {e: Scalar.of(c) for e, c in g.items() if not Scalar.of(c).is_zero()}
    if not poly:
        raise NoDominantTerm("zero map has no dominant term")
    lead = min(poly)
    if m is None:
        m = lead
    if lead != m or m == 0:
        raise NoDominantTerm(f"expected dominant exponent {m}, found {lead}")
    a = poly[m]
    c = nth_root(a.inverse(), m) if m > 0 else nth_root(a, -m)
    rest = {e - m: v / a for e, v in poly.items() if e != m}
    prec = precision + 1
    y = Series({}, prec)
    for _ in range(prec + 1):
        t = (Series.one(prec) + y).scale(c).shift(1)
        h = Series.one(prec)
        for e, v in rest.items():
            h = h + t.int_power(e).scale(v)
        y = h.unit_power(Fraction(-1, m)) - Series.one(prec)
    t = (Series.one(prec) + y).scale(c).shift(1)
    check = evaluate_laurent(poly, t).shift(-m) - Series.one(prec)
    if check.terms:
        raise AssertionError(f"formal_inverse back-substitution failed: {check}")
    return t


@dataclass(frozen=True)
class PhasePart:
    """``sum c_q z^q`` with every exponent q < 0; ``ram`` is the minimal root order."""

    terms: tuple[tuple[Fraction, Scalar], ...] = ()

    @classmethod
    def make(cls, terms: Mapping[Fraction, Number] | Iterable[tuple[Fraction, Number]] = ()) -> "PhasePart":
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Fraction, Scalar] = {}
        for q, c in items:
            q = Fraction(q)
            if q >= 0:
                raise ValueError(f"phase exponents must be negative, got {q}")
            acc[q] = acc[q] + Scalar.of(c) if q in acc else Scalar.of(c)
        return cls(tuple(sorted((q, c) for q, c in acc.items() if not c.is_zero())))

    @classmethod
    def monomial(cls, coeff: Number, exponent) -> "PhasePart":
        return cls.make({Fraction(exponent): coeff})

    @classmethod
    def principal(cls, terms: Mapping[Fraction, Number]) -> tuple["PhasePart", Scalar]:
        """Split a finite sum into its principal part and its constant term."""
        neg = {q: c for q, c in terms.items() if q < 0}
        const = Scalar.of(terms.get(Fraction(0), 0))
        return cls.make(neg), const

    @cached_property
    def ram(self) -> int:
        r = 1
        for q, _ in self.terms:
            r = lcm(r, q.denominator)
        return r

    def is_zero(self) -> bool:
        return not self.terms

    def as_dict(self) -> dict[Fraction, Scalar]:
        return dict(self.terms)

    def __add__(self, other: "PhasePart") -> "PhasePart":
        return PhasePart.make(list(self.terms) + list(other.terms))

    def __neg__(self) -> "PhasePart":
        return PhasePart(tuple((q, -c) for q, c in self.terms))

    def __sub__(self, other: "PhasePart") -> "PhasePart":
        return self + (-other)

    def scale(self, c: Number) -> "PhasePart":
        return PhasePart.make({q: v * c for q, v in self.terms})

    def ord(self) -> Fraction | float:
        return self.terms[0][0] if self.terms else math.inf

    def slope(self) -> Fraction:
        return -self.terms[0][0] if self.terms else Fraction(0)

    def leading(self) -> tuple[Fraction, Scalar]:
        return self.terms[0]

    def integer_part(self) -> "PhasePart":
        return PhasePart(tuple((q, c) for q, c in self.terms if q.denominator == 1))

    def conjugate(self, j: int, r: int | None = None) -> "PhasePart":
        """The substitution t -> zeta_r^j t with t^r = z."""
        r = r or self.ram
        if j % r == 0:
            return self
        out = []
        for q, c in self.terms:
            n = q * r
            assert n.denominator == 1
            out.append((q, c * Scalar.root_of_unity(r, int(n) * j)))
        return PhasePart(tuple(out))

    def conjugates(self, r: int | None = None) -> list["PhasePart"]:
        r = r or self.ram
        return [self.conjugate(j, r) for j in range(r)]

    def sort_key(self) -> tuple:
        return tuple((q, c.sort_key()) for q, c in self.terms)

    @cached_property
    def canonical(self) -> "PhasePart":
        """Deterministic representative of the Galois orbit."""
        return min(self.conjugates(), key=PhasePart.sort_key)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c})z^({q})" for q, c in self.terms)


def ord_z(f: PhasePart) -> Fraction | float:
    return f.ord()


def conjugates(f: PhasePart) -> list[PhasePart]:
    return f.conjugates()


def substitute(f: PhasePart, change: Sequence[Number]) -> tuple[PhasePart, Scalar]:
    """Rewrite ``f`` under the coordinate change ``u = a1 v + a2 v^2 + ...``.

    ``change`` lists the exact coefficients ``a1, a2, ...``; the truncation
    must reach order ``1 + slope(f)``.  Returns the new principal part and
    the constant term; the positive-order tail is dropped.
    """
    coeffs = [Scalar.of(a) for a in change]
    if not coeffs or coeffs[0].is_zero():
        raise NotInvertible("coordinate change has zero linear coefficient")
    if f.is_zero():
        return f, Scalar.of(0)
    need = int(math.floor(f.slope())) + 1
    a1 = coeffs[0]
    if len(coeffs) == 1:
        unit = Series.one(need)
    elif len(coeffs) < need:
        raise InsufficientPrecision(f"change truncated at order {len(coeffs)}, need {need}")
    else:
        unit = Series({i: a / a1 for i, a in enumerate(coeffs)}, len(coeffs))
    root = nth_root(a1, f.ram)
    out: dict[Fraction, Scalar] = {}
    for q, c in f.terms:
        n = q * f.ram
        expansion = unit.unit_power(q)
        lead = c * root ** int(n)
        for k, v in expansion.terms.items():
            e = q + k
            if e <= 0:
                out[e] = out.get(e, Scalar.of(0)) + lead * v
    return PhasePart.principal(out)


def moebius_change(c: Number, e: Number, order: int) -> list[Scalar]:
    """Coefficients of ``u = c v / (1 + e v)`` through ``v^order``."""
    c, e = Scalar.of(c), Scalar.of(e)
    return [c * (-e) ** k for k in range(max(order, 1))]
