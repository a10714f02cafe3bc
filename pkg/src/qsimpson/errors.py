"""Exception types raised across the package."""


class QSimpsonError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(QSimpsonError, ValueError):
    pass


class RankDeficient(QSimpsonError, ValueError):
    pass


class NotAProjector(QSimpsonError, ValueError):
    pass


class InvalidOutcomeLabel(QSimpsonError, KeyError):
    pass


class UndefinedRate(QSimpsonError, ValueError):
    """A conditional rate was requested whose conditioning event has (near) zero probability."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__("undefined rate(s): " + ", ".join(self.missing))


class InvalidParams(QSimpsonError, ValueError):
    pass


class DegenerateParams(QSimpsonError, ValueError):
    pass


class InvalidEpsilon(QSimpsonError, ValueError):
    pass


class ParseError(QSimpsonError, ValueError):
    pass


class ValidationError(QSimpsonError, ValueError):
    pass


class InvariantViolation(QSimpsonError, AssertionError):
    """A numerical invariant that must hold for every input failed."""
