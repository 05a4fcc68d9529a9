"""Exception hierarchy shared by every layer of the engine."""

from __future__ import annotations


class KatzError(Exception):
    """Base class for all engine errors."""


class DivisionByZero(KatzError, ZeroDivisionError):
    pass


class IncompatibleConductor(KatzError):
    pass


class ConductorTooSmall(KatzError):
    """Raised when a computation needs roots of unity beyond the configured cap."""


class CoefficientFieldError(KatzError):
    """A required radical does not live in any cyclotomic field."""


class NotInvertible(KatzError):
    pass


class InsufficientPrecision(KatzError):
    pass


class NoDominantTerm(KatzError):
    pass


class NonIntegralIrregularity(KatzError):
    pass


class RamifiedChoice(KatzError):
    pass


class RigTooLarge(KatzError):
    pass


class InvalidDatum(KatzError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class InfinityNotNormalized(KatzError):
    pass


class IntegerLambda(KatzError):
    pass


class ExcludedTrivialCase(KatzError):
    pass


class InternalInconsistency(KatzError):
    """A bug trap: some identity guaranteed by the theory failed."""


class TrivialBlock(KatzError):
    pass


class SlopeNotGreaterThanOne(KatzError):
    pass


class NotRigidInput(KatzError):
    pass


class ReplayMismatch(KatzError):
    def __init__(self, message, step=None, diff=None):
        self.step = step
        self.diff = diff
        super().__init__(message)


class UnknownName(KatzError):
    pass


class OracleMismatch(KatzError):
    pass


class ParseError(KatzError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
