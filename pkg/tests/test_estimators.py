from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from rigidkatz import corpus
from rigidkatz.datum import FormalTypeDatum
from rigidkatz.errors import InvalidDatum
from rigidkatz.estimators import (
    FourierTransformer,
    InvariantsTransformer,
    KatzReducer,
    MiddleConvolution,
    OperationTransformer,
)
from rigidkatz.formal_disk import Block
from rigidkatz.transforms import MoebiusMap, kummer_datum, moebius

F = Fraction


def test_invariants_transformer():
    X = [corpus.emit(n) for n in ("hypergeometric2", "rig4", "rig0")]
    rows = InvariantsTransformer().fit_transform(X)
    assert rows.shape == (3, 3)
    assert rows[:, 0].tolist() == [2, 2, 2]
    assert rows[:, 2].tolist() == [2, 4, 0]


def test_fit_rejects_invalid_data():
    bad = FormalTypeDatum.make(1, {0: [Block.regular(F(1, 3))]})
    with pytest.raises(InvalidDatum):
        InvariantsTransformer().fit([bad])


def test_fourier_transformer_pipeline():
    pipe = Pipeline([("ft", FourierTransformer()), ("ift", FourierTransformer(inverse=True))])
    X = [corpus.emit("kloosterman"), kummer_datum(F(1, 3))]
    assert pipe.fit_transform(X) == X


def test_operation_transformer_moebius():
    d = corpus.emit("hypergeometric2")
    out = OperationTransformer(op="moebius", phi=MoebiusMap.negation()).fit_transform(d)
    assert out == [moebius(d, MoebiusMap.negation())]
    with pytest.raises(ValueError):
        OperationTransformer(op="rotate").transform([d])


def test_middle_convolution_round_trip_and_clone():
    d = corpus.emit("hypergeometric3")
    mc = MiddleConvolution(lam=F(1, 4))
    assert clone(mc).get_params()["lam"] == F(1, 4)
    (out,) = mc.fit_transform([d])
    (back,) = MiddleConvolution(lam=F(-1, 4)).transform([out])
    assert back == d


def test_katz_reducer():
    names = ["hypergeometric2", "rig4", "rig0", "case-ia"]
    pred = KatzReducer().fit([]).predict([corpus.emit(n) for n in names])
    assert isinstance(pred, np.ndarray)
    assert pred.tolist() == ["Solvable", "NoSolution", "NotRigid", "NoSolution"]
