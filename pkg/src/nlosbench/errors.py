"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class NlosBenchError(Exception):
    """Base class for all errors raised by nlosbench."""


class DataError(NlosBenchError):
    """Input data is malformed or inconsistent."""


class MalformedRow(DataError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class EmptyTrace(DataError):
    pass


class NoTransmissions(DataError):
    pass


class NonUniformSpacing(DataError):
    def __init__(self, index: int, gap_ms: int, period_ms: int):
        super().__init__(
            f"slot {index}: gap of {gap_ms} ms deviates from period {period_ms} ms"
        )
        self.index = index


class ConfigError(NlosBenchError):
    """A ScenarioConfig (or CLI override) violates one of its invariants."""

    def __init__(self, invariant: str):
        super().__init__(f"config invariant violated: {invariant}")
        self.invariant = invariant


class DomainError(NlosBenchError, ValueError):
    pass


class TrainingError(DataError):
    pass


class SingleClass(TrainingError):
    pass


class TooFewSamples(TrainingError):
    pass


class EmptyModel(NlosBenchError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyInput(DataError):
    pass


class KTooLarge(DataError):
    pass


class FoldError(NlosBenchError):
    """A training error raised inside a cross-validation fold."""

    def __init__(self, fold: int, cause: Exception):
        super().__init__(f"fold {fold}: {cause}")
        self.fold = fold
        self.cause = cause
