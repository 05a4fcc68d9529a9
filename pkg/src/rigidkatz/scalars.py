"""Exact arithmetic in cyclotomic fields Q(zeta_N).

A :class:`Scalar` stores rational coordinates in the power basis
``1, zeta, ..., zeta^(phi(N)-1)`` and is always kept at its minimal
conductor, so equality and hashing are plain coordinate comparisons.
"""

from __future__ import annotations

import os
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Union

from sympy import factorint

from .errors import CoefficientFieldError, ConductorTooSmall, DivisionByZero, IncompatibleConductor

Number = Union[int, Fraction, "Scalar"]


def max_conductor() -> int:
    return int(os.environ.get("KATZ_MAX_CONDUCTOR", "1024"))


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@lru_cache(maxsize=None)
def divisors(n: int) -> tuple[int, ...]:
    return tuple(d for d in range(1, n + 1) if n % d == 0)


@lru_cache(maxsize=None)
def totient(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


def _poly_divexact(num: list[int], den: tuple[int, ...]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    assert not any(num), "inexact cyclotomic division"
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients of the n-th cyclotomic polynomial, lowest degree first."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n)[:-1]:
        poly = _poly_divexact(poly, cyclotomic_poly(d))
    return tuple(poly)


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Coordinates of zeta_n^k, k = 0..n-1, in the power basis."""
    phi = totient(n)
    cyc = cyclotomic_poly(n)
    rows = []
    cur = [1] + [0] * (phi - 1)
    for _ in range(n):
        rows.append(tuple(cur))
        lead = cur[-1]
        cur = [0] + cur[:-1]
        if lead:
            for j in range(phi):
                cur[j] -= lead * cyc[j]
    return tuple(rows)


def _from_exponents(terms: dict[int, Fraction], n: int) -> list[Fraction]:
    table = _power_table(n)
    out = [Fraction(0)] * totient(n)
    for k, c in terms.items():
        if c:
            row = table[k % n]
            for j, v in enumerate(row):
                if v:
                    out[j] += c * v
    return out


def _solve(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Exact least-structure solve; returns None if the system is inconsistent."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    aug = [list(matrix[i]) + [rhs[i]] for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / Fraction(aug[r][c])
        aug[r] = [v * inv for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if any(aug[i][-1] != 0 for i in range(r, rows)):
        return None
    sol = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        sol[c] = aug[i][-1]
    return sol


@lru_cache(maxsize=None)
def _subfield_basis(d: int, n: int) -> list[list[Fraction]]:
    """Columns: images of zeta_d^i inside Q(zeta_n), as a row-major matrix."""
    table = _power_table(n)
    step = n // d
    cols = [table[(i * step) % n] for i in range(totient(d))]
    return [[Fraction(cols[j][i]) for j in range(len(cols))] for i in range(totient(n))]


@lru_cache(maxsize=None)
def _subfield_projector(d: int, n: int) -> tuple[tuple[int, ...], tuple[tuple[Fraction, ...], ...]]:
    """Pivot rows P of the subfield basis B and the inverse of B[P].

    ``x`` lies in Q(zeta_d) iff ``B @ (inv @ x[P]) == x``; computing this once
    per (d, n) turns every membership test into two small products.
    """
    basis = _subfield_basis(d, n)
    k = len(basis[0])
    pivots: list[int] = []
    for i in range(len(basis)):
        if _rank([basis[j] for j in pivots + [i]]) == len(pivots) + 1:
            pivots.append(i)
        if len(pivots) == k:
            break
    sub = [basis[i] for i in pivots]
    inv_cols = [_solve(sub, [Fraction(int(r == c)) for r in range(k)]) for c in range(k)]
    inv = tuple(tuple(inv_cols[c][r] for c in range(k)) for r in range(k))
    return tuple(pivots), inv


def _rank(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        p = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[rank], m[p] = m[p], m[rank]
        for i in range(rank + 1, len(m)):
            if m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def _in_subfield(coords: list[Fraction], d: int, n: int) -> tuple[Fraction, ...] | None:
    pivots, inv = _subfield_projector(d, n)
    rhs = [coords[i] for i in pivots]
    sol = tuple(sum((a * b for a, b in zip(row, rhs) if a and b), Fraction(0)) for row in inv)
    basis = _subfield_basis(d, n)
    for i, row in enumerate(basis):
        if sum((a * b for a, b in zip(row, sol) if a and b), Fraction(0)) != coords[i]:
            return None
    return sol


def _minimize(coords: list[Fraction], n: int) -> tuple[int, tuple[Fraction, ...]]:
    if n == 1 or not any(coords[1:]):
        return 1, (coords[0],)
    for d in divisors(n)[1:-1]:
        if d % 4 == 2:
            continue
        sol = _in_subfield(coords, d, n)
        if sol is not None:
            return d, sol
    return n, tuple(coords)


# Products of genuinely cyclotomic scalars are memoised: series arithmetic in
# the stationary-phase kernel multiplies the same few coefficients many times
# and every product has to be reduced to its minimal conductor.
_MUL_CACHE: dict = {}
_MUL_CACHE_SIZE = 1 << 16


class Scalar:
    """An element of Q(zeta_N) held at its minimal conductor N."""

    __slots__ = ("conductor", "coords", "_hash")

    def __init__(self, coords: Iterable[Number] = (0,), conductor: int = 1):
        coords = [Fraction(c) for c in coords]
        if len(coords) != totient(conductor):
            raise ValueError(f"expected {totient(conductor)} coordinates for conductor {conductor}")
        self.conductor, self.coords = _minimize(coords, conductor)
        self._hash = None

    @classmethod
    def _raw(cls, conductor: int, coords: tuple[Fraction, ...]) -> "Scalar":
        obj = cls.__new__(cls)
        obj.conductor = conductor
        obj.coords = coords
        obj._hash = None
        return obj

    @classmethod
    def of(cls, value: Number) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, str):
            value = parse_fraction(value)
        return cls._raw(1, (Fraction(value),))

    @classmethod
    def root_of_unity(cls, n: int, k: int = 1) -> "Scalar":
        _check_cap(n)
        return cls(_from_exponents({k % n: Fraction(1)}, n), n)

    # coordinates ---------------------------------------------------------

    def lift(self, n: int) -> tuple[Fraction, ...]:
        """Coordinates of this element at conductor n (a multiple of ours)."""
        if n % self.conductor:
            raise IncompatibleConductor(f"conductor {self.conductor} does not divide {n}")
        if n == self.conductor:
            return self.coords
        step = n // self.conductor
        return tuple(_from_exponents({i * step: c for i, c in enumerate(self.coords)}, n))

    def embed(self, n: int) -> tuple[Fraction, ...]:
        return self.lift(n)

    def is_rational(self) -> bool:
        return self.conductor == 1

    def as_fraction(self) -> Fraction:
        if self.conductor != 1:
            raise ValueError(f"{self} is not rational")
        return self.coords[0]

    def is_integer(self) -> bool:
        return self.conductor == 1 and self.coords[0].denominator == 1

    def is_zero(self) -> bool:
        return self.conductor == 1 and self.coords[0] == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    # arithmetic ----------------------------------------------------------

    def _common(self, other: Number) -> tuple[int, tuple, tuple]:
        other = Scalar.of(other)
        n = lcm(self.conductor, other.conductor)
        _check_cap(n)
        return n, self.lift(n), other.lift(n)

    def __add__(self, other: Number) -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = Scalar.of(other)
        if self.conductor == 1 and other.conductor == 1:
            return Scalar._raw(1, (self.coords[0] + other.coords[0],))
        n, a, b = self._common(other)
        return Scalar([x + y for x, y in zip(a, b)], n)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar._raw(self.conductor, tuple(-c for c in self.coords))

    def __sub__(self, other: Number) -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        return self + (-Scalar.of(other))

    def __rsub__(self, other: Number) -> "Scalar":
        return Scalar.of(other) - self

    def __mul__(self, other: Number) -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = Scalar.of(other)
        if other.conductor == 1:
            c = other.coords[0]
            return Scalar._raw(self.conductor, tuple(x * c for x in self.coords)) if c else Scalar.of(0)
        if self.conductor == 1:
            return other * self
        key = (self, other)
        hit = _MUL_CACHE.get(key)
        if hit is not None:
            return hit
        out = self._mul_cyclotomic(other)
        if len(_MUL_CACHE) > _MUL_CACHE_SIZE:
            _MUL_CACHE.clear()
        _MUL_CACHE[key] = out
        return out

    def _mul_cyclotomic(self, other: "Scalar") -> "Scalar":
        n, a, b = self._common(other)
        terms: dict[int, Fraction] = {}
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        terms[i + j] = terms.get(i + j, Fraction(0)) + x * y
        return Scalar(_from_exponents(terms, n), n)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise DivisionByZero("division by zero scalar")
        if self.conductor == 1:
            return Scalar._raw(1, (1 / self.coords[0],))
        n = self.conductor
        phi = totient(n)
        cols = []
        for j in range(phi):
            prod = _from_exponents({i + j: c for i, c in enumerate(self.coords) if c}, n)
            cols.append(prod)
        matrix = [[cols[j][i] for j in range(phi)] for i in range(phi)]
        sol = _solve(matrix, [Fraction(1)] + [Fraction(0)] * (phi - 1))
        return Scalar(sol, n)

    def __truediv__(self, other: Number) -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        return self * Scalar.of(other).inverse()

    def __rtruediv__(self, other: Number) -> "Scalar":
        return Scalar.of(other) * self.inverse()

    def __pow__(self, k: int) -> "Scalar":
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = Scalar.of(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # comparison ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.conductor == 1 and self.coords[0] == other
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.conductor == other.conductor and self.coords == other.coords

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.conductor, self.coords)) if self.conductor != 1 else hash(self.coords[0])
        return self._hash

    def sort_key(self) -> tuple:
        return (self.conductor, self.coords)

    def __repr__(self) -> str:
        return f"Scalar({self})"

    def __str__(self) -> str:
        if self.conductor == 1:
            return str(self.coords[0])
        parts = []
        for i, c in enumerate(self.coords):
            if c:
                parts.append(str(c) if i == 0 else f"{c}*z{self.conductor}^{i}")
        return " + ".join(parts)

    # residues ------------------------------------------------------------

    def mod(self, modulus: Fraction = Fraction(1)) -> "Scalar":
        """Shift by a multiple of ``modulus`` so the rational constant lies in [0, modulus)."""
        c0 = self.coords[0]
        shift = (c0 // modulus) * modulus
        if not shift:
            return self
        return Scalar._raw(self.conductor, (c0 - shift,) + self.coords[1:])

    def constant_term(self) -> Fraction:
        return self.coords[0]


class ResidueClass:
    """A scalar taken modulo the integers."""

    __slots__ = ("value",)

    def __init__(self, value: Number):
        self.value = Scalar.of(value).mod(Fraction(1))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResidueClass):
            return NotImplemented
        return self.value == other.value

    def __hash__(self) -> int:
        return hash(self.value)

    def is_zero(self) -> bool:
        return self.value.is_zero()

    def __repr__(self) -> str:
        return f"ResidueClass({self.value})"


def _check_cap(n: int) -> None:
    if n > max_conductor():
        raise ConductorTooSmall(f"conductor {n} exceeds KATZ_MAX_CONDUCTOR={max_conductor()}")


def parse_fraction(text: str) -> Fraction:
    text = text.strip()
    if not text or text.endswith("/") or text.startswith("/") or text.count("/") > 1:
        raise ValueError(f"malformed fraction {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in {text!r}") from None


def arith(a: Number, b: Number, kind: str) -> Scalar:
    a, b = Scalar.of(a), Scalar.of(b)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    if kind == "neg":
        return -a
    raise ValueError(kind)


def is_integer(a: Number) -> bool:
    return Scalar.of(a).is_integer()


def embed(a: Number, n: int) -> tuple[Fraction, ...]:
    return Scalar.of(a).lift(n)


# radicals ------------------------------------------------------------------


def _legendre(a: int, p: int) -> int:
    r = pow(a, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


@lru_cache(maxsize=None)
def sqrt_prime(p: int) -> Scalar:
    """sqrt(p) for a prime p, via quadratic Gauss sums."""
    if p == 2:
        root = Scalar.root_of_unity(8) + Scalar.root_of_unity(8, 7)
    else:
        gauss = Scalar.of(0)
        for a in range(1, p):
            gauss = gauss + Scalar.root_of_unity(p, a) * _legendre(a, p)
        root = gauss if p % 4 == 1 else -Scalar.root_of_unity(4) * gauss
    assert root * root == p
    return root


def _rational_root(q: Fraction, n: int) -> Scalar:
    if q == 0:
        return Scalar.of(0)
    result = Scalar.of(1)
    for part, sign in ((q.numerator, 1), (q.denominator, -1)):
        for p, e in factorint(abs(part)).items():
            if e % n == 0:
                result = result * Fraction(p) ** (sign * (e // n))
            elif (2 * e) % n == 0:
                result = result * sqrt_prime(p) ** (sign * (2 * e // n))
            else:
                raise CoefficientFieldError(f"{q}^(1/{n}) is not in a cyclotomic field")
    if q < 0:
        result = result * Scalar.root_of_unity(2 * n)
    return result


def _as_rational_times_root_of_unity(a: Scalar) -> tuple[Fraction, int, int] | None:
    n = a.conductor
    m = 2 * n if n % 2 else n
    for j in range(m):
        b = a * Scalar.root_of_unity(m, -j)
        if b.is_rational():
            return b.as_fraction(), m, j
    return None


def nth_root(a: Number, n: int) -> Scalar:
    """Some n-th root of ``a`` inside a cyclotomic field.

    Any other root differs by an n-th root of unity; callers that care about
    branches absorb that ambiguity into Galois orbits.
    """
    a = Scalar.of(a)
    if n == 1 or a.is_zero():
        return a
    if a.is_rational():
        root = _rational_root(a.as_fraction(), n)
    else:
        found = _as_rational_times_root_of_unity(a)
        if found is not None:
            q, m, j = found
            root = _rational_root(q, n) * Scalar.root_of_unity(m * n, j)
        else:
            sq = a * a
            found = _as_rational_times_root_of_unity(sq)
            if found is None:
                raise CoefficientFieldError(f"cannot take {n}-th root of {a} in a cyclotomic field")
            q, m, j = found
            root = _rational_root(q, 2 * n) * Scalar.root_of_unity(2 * m * n, j)
            if root ** n != a:
                root = root * Scalar.root_of_unity(2 * n)
    if root ** n != a:
        raise CoefficientFieldError(f"root extraction failed for {a}")
    return root
