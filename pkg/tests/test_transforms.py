from __future__ import annotations

import random
from fractions import Fraction

import pytest

from rigidkatz import corpus
from rigidkatz.datum import INF, FormalTypeDatum, detres, is_valid, rigidity_index
from rigidkatz.errors import ExcludedTrivialCase, IntegerLambda, NotInvertible, SlopeNotGreaterThanOne, TrivialBlock
from rigidkatz.formal_disk import Block, FormalType
from rigidkatz.puiseux import PhasePart
from rigidkatz.randomdata import random_datum, random_rank_one, random_synthesis
from rigidkatz.scalars import ResidueClass
from rigidkatz.transforms import (
    MoebiusMap,
    Skyscraper,
    Undefined,
    dual_datum,
    fourier,
    fourier_rank,
    inverse_fourier,
    kummer_datum,
    local_fourier_finite,
    local_fourier_infty,
    mc_rank,
    middle_convolution,
    moebius,
    rank_one_datum,
    twist,
)

F = Fraction


def r1(entries):
    return rank_one_datum({p: Block.regular(r) if not isinstance(r, Block) else r for p, r in entries.items()})


# ---------------------------------------------------------------------------
# twist


def test_twist_by_trivial_is_identity():
    d = corpus.emit("hypergeometric2")
    assert twist(d, FormalTypeDatum.make(1, {})) == d


def test_twist_involution():
    rng = random.Random(2)
    for _ in range(20):
        d = random_datum(rng, max_rank=3)
        ell = random_rank_one(rng)
        assert twist(twist(d, ell), dual_datum(ell)) == d


def test_kummer_twisted_by_dual_is_trivial():
    k = kummer_datum(F(1, 3))
    assert twist(k, dual_datum(k)) == FormalTypeDatum.make(1, {})


# ---------------------------------------------------------------------------
# Moebius


def test_moebius_identity():
    d = corpus.emit("kloosterman")
    assert moebius(d, MoebiusMap.identity()) == d


def test_moebius_translation_moves_point():
    d = r1({1: F(1, 3), INF: F(-1, 3)})
    out = moebius(d, MoebiusMap.translation(1))  # pull back along z -> z + 1
    assert out.points == [0, INF]
    assert out.type_at(0) == d.type_at(1)


def test_moebius_inversion_swaps_residues():
    out = moebius(kummer_datum(F(1, 3)), MoebiusMap.inversion())
    assert out == kummer_datum(F(-1, 3))
    assert is_valid(out)


def test_moebius_inversion_moves_wild_point():
    d = corpus.emit("airy")
    out = moebius(d, MoebiusMap.inversion())
    assert out.points == [0]
    assert rigidity_index(out) == 2 and is_valid(out)
    assert moebius(out, MoebiusMap.inversion()) == d


def test_moebius_map_algebra():
    phi = MoebiusMap(2, 1, 1, 1)
    assert phi.compose(phi.inverse()).same_as(MoebiusMap.identity())
    assert phi(INF) == 2 and phi(-1) == INF and phi(0) == 1
    assert MoebiusMap.from_params(phi.to_params()) == phi
    with pytest.raises(NotInvertible):
        MoebiusMap(1, 1, 1, 1)


def test_moebius_preserves_invariants():
    rng = random.Random(6)
    maps = [MoebiusMap.translation(2), MoebiusMap.scaling(3), MoebiusMap.inversion(), MoebiusMap(1, 2, 1, 3)]
    for _ in range(20):
        d = random_datum(rng, max_rank=3, cyclotomic=False, max_ram=1)
        for phi in maps:
            out = moebius(d, phi)
            assert out.rank == d.rank and is_valid(out)
            assert rigidity_index(out) == rigidity_index(d)
            assert moebius(out, phi.inverse()) == d


# ---------------------------------------------------------------------------
# local Fourier


def test_local_fourier_regular_at_origin():
    assert local_fourier_finite(0, Block.regular(F(1, 3))) == [Block.regular(F(1, 3))]


def test_local_fourier_kloosterman_shape():
    (b,) = local_fourier_finite(0, Block.make(PhasePart.monomial(1, -1)))
    assert (b.rank, b.ram, b.slope) == (2, 2, F(1, 2))


def test_local_fourier_encodes_point():
    (b,) = local_fourier_finite(1, Block.regular(F(1, 3)))
    assert b.phase == PhasePart.monomial(1, -1) and b.rank == 1


def test_local_fourier_gaussian():
    out = local_fourier_infty(Block.make(PhasePart.monomial(F(1, 2), -2)))
    assert out == [Block.make(PhasePart.monomial(F(-1, 2), -2))]


def test_local_fourier_slope_three():
    (b,) = local_fourier_infty(Block.make(PhasePart.monomial(1, -3)))
    assert (b.rank, b.slope) == (2, F(3, 2))
    # and back: the ramified slope-3/2 block returns to rank one, slope three
    (c,) = local_fourier_infty(b)
    assert (c.rank, c.slope) == (1, 3)


def test_local_fourier_airy_direction():
    (b,) = local_fourier_infty(Block.make(PhasePart.monomial(1, F(-3, 2))))
    assert (b.rank, b.slope) == (1, 3)


def test_local_fourier_errors():
    with pytest.raises(TrivialBlock):
        local_fourier_finite(0, Block.regular(0))
    with pytest.raises(SlopeNotGreaterThanOne):
        local_fourier_infty(Block.make(PhasePart.monomial(1, -1)))


def test_unipotent_structure_survives_local_fourier():
    (b,) = local_fourier_finite(0, Block.regular(F(1, 3), unipotent=3))
    assert b.unipotent == 3


# ---------------------------------------------------------------------------
# global Fourier


@pytest.mark.parametrize("lam", [F(1, 3), F(1, 2), F(3, 7)])
def test_fourier_of_kummer(lam):
    assert fourier(kummer_datum(lam)) == kummer_datum(-lam)


def test_fourier_skyscraper():
    d = FormalTypeDatum.make(1, {INF: [Block.make(PhasePart.monomial(1, -1))]})
    assert isinstance(fourier(d), Skyscraper)


def test_fourier_two_regular_points_gives_confluent_shape():
    a, b = F(1, 3), F(1, 5)
    out = fourier(r1({0: a, 1: b, INF: -a - b}))
    assert out.rank == 2
    assert out.points == [0, INF]
    assert all(bl.slope == 0 for bl in out.type_at(0).blocks)
    slopes = sorted(bl.slope for bl in out.type_at(INF).blocks)
    assert slopes == [0, 1]
    assert rigidity_index(out) == 2


def test_fourier_twice_is_negation():
    for name in ("kloosterman", "hypergeometric2", "confluent", "airy", "gaussian"):
        d = corpus.emit(name)
        assert fourier(fourier(d)) == moebius(d, MoebiusMap.negation()), name


def test_inverse_fourier():
    for name in ("kloosterman", "hypergeometric2"):
        d = corpus.emit(name)
        assert inverse_fourier(fourier(d)) == d
        assert fourier(inverse_fourier(d)) == d


def test_fourier_rank_and_rig_on_random_data():
    rng = random.Random(17)
    done = 0
    for _ in range(60):
        _, _, d = random_synthesis(rng, max_len=2)
        out = fourier(d)
        if isinstance(out, (Skyscraper, Undefined)):
            continue
        assert out.rank == fourier_rank(d)
        assert rigidity_index(out) == rigidity_index(d) == 2
        assert is_valid(out)
        done += 1
    assert done > 20


def test_undefined_step_corpus_entry_has_undefined_fourier():
    from rigidkatz.engine import apply_step, select_step

    d = corpus.emit("undefined-step")
    assert isinstance(apply_step(d, select_step(d)), Undefined)


# ---------------------------------------------------------------------------
# middle convolution


def test_mc_round_trip():
    d = corpus.emit("hypergeometric3")
    lam = F(2, 9)
    assert middle_convolution(middle_convolution(d, lam), -lam) == d


def test_mc_three_regular_points():
    a, b = F(1, 3), F(1, 5)
    d = r1({0: a, 1: b, INF: -a - b})
    out = middle_convolution(d, F(1, 7))
    assert out.rank == 2 == mc_rank(d, F(1, 7))
    assert rigidity_index(out) == 2 and is_valid(out)


def test_mc_rank_is_minus_euler_char_of_twisted_datum():
    from rigidkatz.datum import euler_char

    a, b = F(1, 3), F(1, 5)
    d = r1({0: a, 1: b, INF: -a - b})
    lam = F(1, 7)
    # L (x) (z - t)^lam viewed as a datum in z with the extra point t generic
    twisted = FormalTypeDatum.make(1, list(d.entries[:-1]) + [(F(1, 2), [Block.regular(lam)]),
                                                              (INF, [Block.regular(-a - b - lam)])])
    assert mc_rank(d, lam) == -euler_char(twisted)


def test_mc_errors():
    with pytest.raises(IntegerLambda):
        middle_convolution(corpus.emit("hypergeometric2"), 3)
    with pytest.raises(ExcludedTrivialCase):
        middle_convolution(kummer_datum(F(1, 3)), F(1, 2))


def test_excluded_shape_detection():
    from rigidkatz.transforms import is_excluded_shape

    assert is_excluded_shape(kummer_datum(F(1, 3)))
    assert not is_excluded_shape(r1({0: F(1, 3), 1: F(1, 5), INF: F(-8, 15)}))
    assert not is_excluded_shape(corpus.emit("gaussian"))


def test_detres_class_preserved_by_fourier():
    d = corpus.emit("kloosterman")
    out = fourier(d)
    total = sum((detres(v) for _, v in out.entries), detres(FormalType.trivial(1)))
    assert ResidueClass(total) == ResidueClass(0)
