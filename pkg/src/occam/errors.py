"""Exception taxonomy shared by the library and the CLI.

Every error raised across the public API derives from :class:`OccamError` and
carries a stable ``code`` string so callers (and the CLI's JSON error output)
can dispatch without string-matching messages.
"""

from __future__ import annotations


class OccamError(Exception):
    """Base class for all errors raised by this package."""

    code = "Error"

    def to_json_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class MalformedFile(OccamError):
    """Input file cannot be parsed as the expected format."""

    code = "MalformedFile"


class NonFinite(OccamError):
    """Embedding values contain NaN or infinity."""

    code = "NonFinite"


class WrongRank(OccamError):
    """Array has the wrong number of dimensions."""

    code = "WrongRank"


class LengthMismatch(OccamError):
    """Label count does not match embedding row count."""

    code = "LengthMismatch"


class NegativeLabel(OccamError):
    """Class labels must be non-negative integers."""

    code = "NegativeLabel"


class OutOfRange(OccamError):
    """A parameter lies outside its documented domain."""

    code = "OutOfRange"


class CapacityExceeded(OccamError):
    """A requested allocation would exceed the configured memory cap."""

    code = "CapacityExceeded"


class EmptyGroup(OccamError):
    """A point group handed to the distance engine is empty."""

    code = "EmptyGroup"


class UndefinedScore(OccamError):
    """The metric is mathematically undefined for this input.

    Carries a ``reason`` string (e.g. ``"single_class"``, ``"too_few_points"``)
    echoed by score reports.
    """

    code = "UndefinedScore"

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


class KeyMismatch(OccamError):
    """Predicted and ground-truth rankings cover different model sets."""

    code = "KeyMismatch"


class TooFewModels(OccamError):
    """Rank evaluation needs at least two models."""

    code = "TooFewModels"


class RankDeficient(OccamError):
    """Classifier weight matrix is numerically rank-deficient."""

    code = "RankDeficient"


class NoSolution(OccamError):
    """The center-shift linear system has no solution within tolerance."""

    code = "NoSolution"


class InvalidSpec(OccamError):
    """Synthetic-data specification is internally inconsistent."""

    code = "InvalidSpec"
