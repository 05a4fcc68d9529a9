from __future__ import annotations

import dataclasses
import random
from fractions import Fraction

import pytest

from rigidkatz import corpus
from rigidkatz.datum import INF, FormalTypeDatum, rigidity_index
from rigidkatz.engine import (
    NoSolution,
    NotRigid,
    Operation,
    OperationTrace,
    RankOne,
    ReductionStep,
    Solvable,
    apply_operations,
    minimizers,
    reduce,
    replay,
    select_step,
    solve_ds,
)
from rigidkatz.errors import InvalidDatum, NotRigidInput, ReplayMismatch
from rigidkatz.formal_disk import Block
from rigidkatz.puiseux import PhasePart
from rigidkatz.randomdata import random_synthesis
from rigidkatz.scalars import Scalar
from rigidkatz.transforms import MoebiusMap, kummer_datum

F = Fraction


def test_select_step_rank_one():
    assert select_step(kummer_datum(F(1, 3))) == RankOne()


def test_select_step_hypergeometric_is_case_ib():
    d = corpus.emit("hypergeometric2")
    step = select_step(d)
    assert step.kind == "TwistMC"
    residues = [b.residue for _, b in step.choices]
    assert step.lam == sum(residues, Scalar.of(0)).mod()
    assert not step.lam.is_integer()


def test_select_step_kloosterman_is_case_two():
    step = select_step(corpus.emit("kloosterman"))
    assert step.kind == "TwistMoebiusFT"
    assert step.phi is None  # the big point is already at infinity
    assert step.ell == FormalTypeDatum.make(1, {})


def test_case_two_moves_a_finite_big_point_to_infinity():
    d = _moved_airy()
    step = select_step(d)
    assert step.kind == "TwistMoebiusFT"
    assert step.phi(INF) == 1
    v = reduce(d)
    assert isinstance(v, Solvable) and v.trace.terminal.rank == 1


def _moved_airy():
    from rigidkatz.transforms import moebius

    # put the Airy singularity at z = 1
    return moebius(corpus.emit("airy"), MoebiusMap(1, 1, 1, 0).inverse())


def test_select_step_requires_rigid_input():
    with pytest.raises(NotRigidInput):
        select_step(corpus.emit("rig0"))


def test_two_big_points_force_rig_at_most_zero():
    # each big point contributes delta(END) >= rank^2, so rigid data never reach that branch
    d = FormalTypeDatum.make(2, {0: [Block.make(PhasePart.monomial(1, F(-1, 2)), F(1, 4))],
                                 INF: [Block.make(PhasePart.monomial(1, F(-1, 2)), F(1, 4))]})
    assert rigidity_index(d) == 0
    assert reduce(d) == NotRigid(0)


def test_minimizers_cover_infinity():
    pts = [p for p, _ in minimizers(corpus.emit("hypergeometric2"))]
    assert pts == [0, 1, INF]


def test_reduce_examples():
    hyp = reduce(corpus.emit("hypergeometric2"))
    assert isinstance(hyp, Solvable) and len(hyp.trace.steps) == 1 and hyp.trace.terminal.rank == 1
    kl = reduce(corpus.emit("kloosterman"))
    assert isinstance(kl, Solvable) and len(kl.trace.steps) <= 2
    bad = reduce(corpus.emit("rig4"))
    assert isinstance(bad, NoSolution) and bad.reason == "RigExceedsTwo"
    nr = reduce(corpus.emit("rig0"))
    assert isinstance(nr, NotRigid) and nr.rig == 0


def test_solve_ds():
    v = solve_ds(kummer_datum(F(1, 3)))
    assert isinstance(v, Solvable) and v.trace.steps == []
    assert "rank one" in v.certificate()
    hyp = solve_ds(corpus.emit("hypergeometric2"))
    assert "middle convolution" in hyp.certificate()
    with pytest.raises(InvalidDatum):
        solve_ds(FormalTypeDatum.make(1, {0: [Block.regular(F(1, 3))], 1: [Block.regular(F(1, 3))]}))


def test_snapshots_keep_rig_two():
    v = reduce(corpus.emit("hypergeometric3"))
    assert [s["rank"] for s in v.trace.snapshots] == [3, 2, 1]
    assert all(s["rig"] == 2 for s in v.trace.snapshots)


def test_replay_both_directions():
    for name in ("hypergeometric2", "hypergeometric3", "kloosterman", "airy", "confluent"):
        v = reduce(corpus.emit(name))
        assert replay(v.trace, "backward") == v.trace.initial
        assert replay(v.trace, "forward") == v.trace.terminal


def test_replay_empty_trace():
    d = kummer_datum(F(2, 5))
    trace = OperationTrace(initial=d, terminal=d)
    assert replay(trace, "backward") == d
    assert replay(trace, "forward") == d


def test_replay_detects_corrupted_lambda():
    v = reduce(corpus.emit("hypergeometric2"))
    step = v.trace.steps[0]
    bad = dataclasses.replace(step, lam=step.lam + F(1, 10))
    trace = dataclasses.replace(v.trace, steps=[bad])
    with pytest.raises(ReplayMismatch) as info:
        replay(trace, "backward")
    assert info.value.step == 0


def test_replay_rejects_unknown_direction():
    v = reduce(corpus.emit("hypergeometric2"))
    with pytest.raises(ValueError):
        replay(v.trace, "sideways")


def test_operation_inverse():
    d = corpus.emit("hypergeometric2")
    ops = [
        Operation("twist", {"ell": kummer_datum(F(1, 5))}),
        Operation("moebius", {"phi": MoebiusMap.translation(2)}),
        Operation("fourier", {"inverse": False}),
        Operation("mc", {"lam": F(1, 4)}),
    ]
    for op in ops:
        out = op.apply(d)
        assert op.inverse().apply(out) == d, op
    assert apply_operations(d, ops + [o.inverse() for o in reversed(ops)]) == d


def test_step_operations_order():
    step = ReductionStep("TwistMoebiusFT", FormalTypeDatum.make(1, {}), (), 2, phi=MoebiusMap.inversion())
    assert [o.op for o in step.operations()] == ["moebius", "twist", "fourier"]
    assert [o.op for o in step.inverse_operations()] == ["fourier", "twist", "moebius"]


def test_reduction_terminates_within_rank_steps():
    rng = random.Random(23)
    for _ in range(30):
        _, _, d = random_synthesis(rng)
        v = solve_ds(d)
        assert isinstance(v, Solvable)
        assert len(v.trace.steps) <= d.rank - 1
        assert replay(v.trace) == d
