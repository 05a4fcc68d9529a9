"""Built-in example data with their expected invariants and verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .datum import INF, FormalTypeDatum
from .errors import UnknownName
from .formal_disk import Block
from .puiseux import PhasePart
from .scalars import Scalar, parse_fraction
from .transforms import kummer_datum

F = Fraction


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    build: Callable[..., FormalTypeDatum]
    description: str
    provenance: str
    rig: int
    verdict: str
    reason: str | None = None
    ranks: tuple[int, ...] = ()
    params: dict = field(default_factory=dict)

    def datum(self, **kw) -> FormalTypeDatum:
        return self.build(**kw).canonical()

    def metadata(self) -> dict:
        meta = {
            "name": self.name,
            "description": self.description,
            "provenance": self.provenance,
            "expected": {"rig": self.rig, "verdict": self.verdict},
        }
        if self.reason:
            meta["expected"]["reason"] = self.reason
        if self.ranks:
            meta["expected"]["ranks"] = list(self.ranks)
        return meta


def _reg(*residues) -> list[Block]:
    return [Block.regular(r) for r in residues]


def trivial() -> FormalTypeDatum:
    return FormalTypeDatum.make(1, {})


def kummer(lam=F(1, 3)) -> FormalTypeDatum:
    if isinstance(lam, str):
        lam = parse_fraction(lam)
    return kummer_datum(lam)


def hypergeometric2() -> FormalTypeDatum:
    return FormalTypeDatum.make(2, {
        0: _reg(F(1, 3), F(1, 2)),
        1: _reg(F(1, 5), F(2, 7)),
        INF: _reg(F(1, 11), 2 - F(1, 3) - F(1, 2) - F(1, 5) - F(2, 7) - F(1, 11)),
    })


def hypergeometric3() -> FormalTypeDatum:
    # Pochhammer-type: generic at 0 and infinity, a pseudo-reflection at 1.
    return FormalTypeDatum.make(3, {
        0: _reg(F(1, 3), F(1, 2), F(1, 5)),
        1: [Block.regular(0, 1, 2), Block.regular(F(2, 7))],
        INF: _reg(F(1, 11), F(1, 13), 2 - F(1, 3) - F(1, 2) - F(1, 5) - F(2, 7) - F(1, 11) - F(1, 13)),
    })


def kloosterman() -> FormalTypeDatum:
    # Bessel/Kloosterman: unipotent at 0, totally wild of slope 1/2 at infinity.
    return FormalTypeDatum.make(2, {
        0: [Block.regular(0, 2)],
        INF: [Block.make(PhasePart.monomial(2, F(-1, 2)), F(1, 4))],
    })


def airy() -> FormalTypeDatum:
    return FormalTypeDatum.make(2, {INF: [Block.make(PhasePart.monomial(F(2, 3), F(-3, 2)), F(1, 4))]})


def gaussian() -> FormalTypeDatum:
    return FormalTypeDatum.make(1, {INF: [Block.make(PhasePart.monomial(F(1, 2), -2))]})


def confluent(a=F(1, 3), b=F(1, 5)) -> FormalTypeDatum:
    # Fourier transform of z^a (z-1)^b: regular at 0, two slope-one directions at infinity.
    a, b = F(a), F(b)
    return FormalTypeDatum.make(2, {
        0: _reg(0, -a - b),
        INF: [Block.regular(a), Block.make(PhasePart.monomial(1, -1), b)],
    })


def rig4() -> FormalTypeDatum:
    # Scalar local monodromy at 0 forces delta(END) = 0 there.
    return FormalTypeDatum.make(2, {
        0: [Block.regular(F(1, 3), 1, 2)],
        1: _reg(F(1, 5), F(2, 5)),
        INF: _reg(F(1, 7), 1 - F(2, 3) - F(3, 5) - F(1, 7) + 1),
    })


def rig0() -> FormalTypeDatum:
    # Four regular points of rank two: the Painleve VI configuration.
    return FormalTypeDatum.make(2, {
        0: _reg(F(1, 3), F(1, 2)),
        1: _reg(F(1, 5), F(2, 5)),
        2: _reg(F(1, 7), F(3, 7)),
        INF: _reg(F(1, 11), 3 - F(1, 3) - F(1, 2) - F(3, 5) - F(4, 7) - F(1, 11)),
    })


def case_ia() -> FormalTypeDatum:
    # Every point has the single minimizer of residue 1/3 and 1/3 + 1/3 + 1/3 = 1.
    return FormalTypeDatum.make(2, {p: [Block.regular(F(1, 3), 2)] for p in (0, 1, INF)})


def undefined_step() -> FormalTypeDatum:
    # Found by seeded random search over rank <= 3 data: the Fourier step needs
    # negative horizontal padding at a finite dual point.
    return FormalTypeDatum.make(2, {
        -1: _reg(0, F(1, 3)),
        1: [Block.regular(0), Block.make(PhasePart.monomial(-1, -1), F(2, 3))],
    })


CORPUS: dict[str, CorpusEntry] = {
    e.name: e
    for e in [
        CorpusEntry("trivial", trivial, "trivial rank-one datum", "TRIVIAL", 2, "Solvable", ranks=(1,)),
        CorpusEntry("kummer", kummer, "Kummer system K^lambda: residue lambda at 0, -lambda at infinity",
                    "REFERENCE: Kummer systems", 2, "Solvable", ranks=(1,), params={"lambda": "1/3"}),
        CorpusEntry("hypergeometric2", hypergeometric2, "rank-2 hypergeometric, three regular points",
                    "DERIVED: commutant oracle", 2, "Solvable", ranks=(2, 1)),
        CorpusEntry("hypergeometric3", hypergeometric3, "rank-3 hypergeometric with a pseudo-reflection at 1",
                    "DERIVED: commutant oracle", 2, "Solvable", ranks=(3, 2, 1)),
        CorpusEntry("kloosterman", kloosterman, "Kloosterman/Bessel: J(0,2) at 0, ram-2 slope-1/2 at infinity",
                    "DERIVED: conjugate-pair oracle", 2, "Solvable", ranks=(2, 1)),
        CorpusEntry("airy", airy, "Airy: single point at infinity, ram 2, slope 3/2",
                    "DERIVED: delta(END) = 6 at infinity", 2, "Solvable", ranks=(2, 1)),
        CorpusEntry("gaussian", gaussian, "rank one with phase z^2/2 at infinity (slope 2, self-dual)",
                    "DERIVED: stationary phase", 2, "Solvable", ranks=(1,)),
        CorpusEntry("confluent", confluent, "confluent hypergeometric: Fourier transform of z^a (z-1)^b",
                    "DERIVED: Fourier rank formula", 2, "Solvable", ranks=(2, 1)),
        CorpusEntry("rig4", rig4, "rank 2 with scalar type at 0", "DERIVED: delta(END) = 0 at a scalar point",
                    4, "NoSolution", reason="RigExceedsTwo"),
        CorpusEntry("rig0", rig0, "rank 2, four regular points (Painleve VI type)", "REFERENCE: rig 0 gives a surface",
                    0, "NotRigid"),
        CorpusEntry("case-ia", case_ia, "J(1/3,2) at three points: every minimizer sum is an integer",
                    "DERIVED: search over rank-2 regular data", 2, "NoSolution", reason="CaseIa"),
        CorpusEntry("undefined-step", undefined_step, "rank 2 datum whose Case I step is undefined",
                    "DERIVED: seeded randomized search", 2, "NoSolution", reason="UndefinedStep"),
    ]
}


def names() -> list[str]:
    return sorted(CORPUS)


def get(name: str) -> CorpusEntry:
    try:
        return CORPUS[name]
    except KeyError:
        raise UnknownName(f"unknown corpus entry {name!r}; known: {', '.join(names())}") from None


def emit(name: str, **kw) -> FormalTypeDatum:
    return get(name).datum(**kw)
