"""Semantic exception hierarchy.

Every error the library raises deliberately derives from ScopicError, so
callers (and the CLI exit-code mapping) can distinguish contract violations
from genuine bugs.
"""

from __future__ import annotations


class ScopicError(Exception):
    """Base class for all deliberate errors raised by this package."""


class DegenerateInputError(ScopicError, ValueError):
    """Input too small or too degenerate to carry the requested statistic."""


class InvalidMixtureError(ScopicError, ValueError):
    """Mixture weights are negative or do not sum to one."""


class DegenerateConditionerError(ScopicError, ValueError):
    """The conditioning variable has zero variance."""


class InsufficientConditioningError(ScopicError, ValueError):
    """No conditioning bin holds enough points to estimate a variance."""


class UnsupportedVariantError(ScopicError, TypeError):
    """Operation not defined for this state-model variant."""


class SamplerStallError(ScopicError, RuntimeError):
    """Rejection sampler exceeded its stall budget (indicates a bug)."""


class GridResolutionError(ScopicError, ValueError):
    """Grid too coarse or too narrow for the requested transform."""


class CoherencePresentError(ScopicError, ValueError):
    """Decomposition refused: the targeted off-diagonal element is nonzero."""


class SoundnessViolationError(ScopicError, AssertionError):
    """A brute-force soundness oracle found a criterion firing falsely."""


class SampleParseError(ScopicError, ValueError):
    """A sample file failed to parse; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ModeMismatchError(ScopicError, ValueError):
    """Analysis mode and supplied data sets do not match."""
