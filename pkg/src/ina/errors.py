"""Exception types shared across the package."""

from __future__ import annotations


class InaError(Exception):
    """Base class for all errors raised by this package."""


class TableFormatError(InaError):
    """A synonym or lemma table file does not follow its line format."""


class MissingColumn(InaError):
    """The corpus CSV header lacks a required column."""


class MalformedRow(InaError):
    """A corpus CSV row has the wrong number of fields."""


class EmptyCorpus(InaError):
    """The corpus contains no data rows."""


class DegenerateCorpus(InaError):
    """Training needs at least two distinct classes."""


class NoPositiveWeight(InaError):
    """Every trained feature weight is non-positive; the model is unusable."""


class BadFormat(InaError):
    """A model file is not parseable or carries the wrong format tag."""


class InvariantViolation(InaError):
    """A model file parsed but breaks a structural invariant.

    ``invariant`` names the rule that failed, e.g. ``"weight_finite"``.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class InvalidModel(InaError):
    """A model reached inference in an unusable state (w_max <= 0)."""


class EmptyTestSet(InaError):
    """Evaluation needs at least one test case."""


class EmptyQuery(InaError):
    """Unknown-token injection needs at least one token to replace."""


class UsageError(InaError):
    """Bad command line arguments."""
