"""
Error types raised by the LOPC core modules.

All errors are ``ValueError`` subclasses so callers that only care about
"bad input" can keep catching ``ValueError``.
"""

from fractions import Fraction
from typing import Optional


class LOPCError(ValueError):
    """Base class for every error raised by the library."""


class UnknownPartyError(LOPCError):
    """A party/variable label is not present in the distribution."""


class PartitionError(LOPCError):
    """A partition overlaps, does not cover, or has an empty side."""


class ClassificationError(LOPCError):
    """The distribution does not have the shape the classifier expects."""


class MajorizationFails(LOPCError):
    """The requested conversion needs a majorization relation that does not hold."""


class NotDoublyStochastic(LOPCError):
    """A matrix row or column does not sum to exactly 1."""


class NonUniformKeepSet(LOPCError):
    """The procrustean keep set has unequal weights."""


class AlphabetMismatch(LOPCError):
    """A protocol refers to symbols or variables the distribution does not have."""


class KeyTooSmall(LOPCError):
    """The one-time-pad key alphabet is smaller than the message alphabet."""


class NotBlockPure(LOPCError):
    """The distribution is correlated with Eve."""


class DeltaTooSmall(LOPCError):
    """The typical set is empty for the requested tolerance."""


class EveCorrelated(LOPCError):
    """Eve does not factor out of the distribution."""


class WrongInputState(LOPCError):
    """A canned protocol was given an input state it was not built for."""


class StateSpaceTooLarge(LOPCError):
    """Exact execution would enumerate more outcomes than the configured limit."""


class ParseError(LOPCError):
    """A distribution or protocol file is malformed."""


class NormalizationError(LOPCError):
    """
    Probabilities do not sum to exactly 1.

    Attributes:
        deficit: ``1 - total`` as an exact rational (negative when the
            entries overshoot).
    """

    def __init__(self, message: str, deficit: Optional[Fraction] = None):
        super().__init__(message)
        self.deficit = deficit
