"""Brute-force cross-checks for the block calculus.

Nothing here uses Galois descent: every block is expanded into its full list
of conjugate phases over the ramified cover and pairwise orders are summed
directly.  Horizontal sections are counted from block identities (commutant
dimension), independently of the HOM decomposition.
"""

from __future__ import annotations

from fractions import Fraction

from .datum import FormalTypeDatum, point_str
from .errors import OracleMismatch
from .formal_disk import Block, FormalType, end


def expanded_phases(v: FormalType) -> list:
    out = []
    for b in v.blocks:
        for f in b.phase.conjugates():
            out.extend([f] * (b.unipotent * b.mult))
    return out


def pair_irreg(v: FormalType, w: FormalType) -> Fraction:
    """``irreg(HOM(V, W)) = sum_{i,j} max(-ord(f_j - f_i), 0)`` over conjugate phases."""
    total = Fraction(0)
    fv, fw = expanded_phases(v), expanded_phases(w)
    for a in fv:
        for b in fw:
            diff = b - a
            if not diff.is_zero():
                total += max(-diff.ord(), 0)
    return total


def _same_component(b1: Block, b2: Block) -> bool:
    return b1.phase == b2.phase and b1.residue == b2.residue


def pair_hor(v: FormalType, w: FormalType) -> int:
    """``dim Hom(V, W)`` from Jordan sizes of isomorphic components."""
    total = 0
    for b1 in v.blocks:
        for b2 in w.blocks:
            if _same_component(b1, b2):
                total += min(b1.unipotent, b2.unipotent) * b1.mult * b2.mult
    return total


def pair_delta(v: FormalType, w: FormalType) -> int:
    irreg = pair_irreg(v, w)
    if irreg.denominator != 1:
        raise OracleMismatch(f"oracle irregularity {irreg} is not an integer")
    return int(irreg) + v.rank * w.rank - pair_hor(v, w)


def oracle_point(v: FormalType) -> dict:
    irreg = sum((b.rank * b.slope for b in v.blocks), Fraction(0))
    hor = sum(b.mult for b in v.blocks if b.phase.is_zero() and b.residue.is_zero())
    return {
        "rank": v.rank,
        "irreg": int(irreg),
        "hor": hor,
        "delta": int(irreg) + v.rank - hor,
        "delta_end": pair_delta(v, v),
    }


def oracle_invariants(d: FormalTypeDatum) -> dict:
    points = {point_str(p): oracle_point(v) for p, v in d.entries}
    chi = 2 * d.rank - sum(p["delta"] for p in points.values())
    rig = 2 * d.rank**2 - sum(p["delta_end"] for p in points.values())
    return {"rank": d.rank, "points": points, "chi": chi, "rig": rig}


def calculus_invariants(d: FormalTypeDatum) -> dict:
    points = {}
    for p, v in d.entries:
        e = end(v)
        points[point_str(p)] = {"rank": v.rank, "irreg": v.irreg, "hor": v.hor, "delta": v.delta, "delta_end": e.delta}
    chi = 2 * d.rank - sum(p["delta"] for p in points.values())
    rig = 2 * d.rank**2 - sum(p["delta_end"] for p in points.values())
    return {"rank": d.rank, "points": points, "chi": chi, "rig": rig}


def check_invariants(d: FormalTypeDatum) -> dict:
    """Both paths; raises OracleMismatch on any disagreement."""
    a, b = calculus_invariants(d), oracle_invariants(d)
    if a != b:
        raise OracleMismatch(f"block calculus {a} != oracle {b}")
    return a
