"""scikit-learn style wrappers: each estimator maps a list of data to a list of results."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .datum import FormalTypeDatum, euler_char, rigidity_index, validate
from .engine import Operation, solve_ds
from .errors import InvalidDatum
from .transforms import MoebiusMap


def _as_list(X) -> list:
    if isinstance(X, FormalTypeDatum):
        return [X]
    return list(X)


class _Stateless(BaseEstimator, TransformerMixin):
    """Nothing to learn; ``fit`` only checks the inputs are valid data."""

    def fit(self, X, y=None):
        for d in _as_list(X):
            problems = validate(d.canonical())
            if problems:
                raise InvalidDatum(problems)
        return self


class InvariantsTransformer(_Stateless):
    """Rows of ``(rank, chi, rig)``."""

    def transform(self, X):
        rows = [(d.rank, euler_char(d), rigidity_index(d)) for d in _as_list(X)]
        return np.array(rows, dtype=np.int64).reshape(-1, 3)


class OperationTransformer(_Stateless):
    """Apply one global operation (``twist``, ``moebius``, ``fourier`` or ``mc``) to each datum.

    Results are data, or ``Skyscraper`` / ``Undefined`` markers.
    """

    def __init__(self, op: str = "fourier", ell=None, phi=None, lam=None, inverse: bool = False):
        self.op = op
        self.ell = ell
        self.phi = phi
        self.lam = lam
        self.inverse = inverse

    def _operation(self) -> Operation:
        if self.op == "twist":
            return Operation("twist", {"ell": self.ell})
        if self.op == "moebius":
            return Operation("moebius", {"phi": self.phi or MoebiusMap.identity()})
        if self.op == "fourier":
            return Operation("fourier", {"inverse": self.inverse})
        if self.op == "mc":
            return Operation("mc", {"lam": self.lam})
        raise ValueError(f"unknown operation {self.op!r}")

    def transform(self, X):
        op = self._operation()
        return [op.apply(d) for d in _as_list(X)]


class FourierTransformer(OperationTransformer):
    def __init__(self, inverse: bool = False):
        super().__init__(op="fourier", inverse=inverse)


class MiddleConvolution(OperationTransformer):
    def __init__(self, lam=None):
        super().__init__(op="mc", lam=lam)


class KatzReducer(BaseEstimator):
    """Runs the reduction; ``predict`` gives verdict names, ``transform`` full verdicts."""

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return [solve_ds(d) for d in _as_list(X)]

    def predict(self, X):
        return np.array([v.verdict for v in self.transform(X)], dtype=object)

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)
