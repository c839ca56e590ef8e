###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Exception hierarchy used throughout neuroexam.

Every error derives from :class:`NeuroExamError` and from the closest
builtin exception, so callers can either catch the package errors as a
group or keep using generic ``ValueError``/``RuntimeError`` handlers.
"""

__all__ = (
    "AllLowConfidenceError", "ConfigError", "ConvergenceError",
    "ConvergenceWarning", "DegenerateError", "DegenerateFoldError",
    "EmptyMatrixError", "FitError", "InsufficientDataError",
    "NeuroExamError", "NoCyclesError", "NoStandUpError", "ParseError",
    "RangeError", "SchemaError", "SegmentationError",
)


class NeuroExamError(Exception):
    """Base class for all errors raised by neuroexam."""

    @property
    def reason(self):
        """Short machine readable reason used in error reports."""
        return type(self).__name__


class ParseError(NeuroExamError, ValueError):
    """Input could not be parsed as JSON, CSV or YAML."""


class SchemaError(NeuroExamError, ValueError):
    """Input parsed but violates the recording or table schema."""


class ConfigError(SchemaError):
    """Unknown or invalid configuration keys or values."""


class RangeError(NeuroExamError, ValueError):
    """Invalid frame interval."""


class DegenerateError(NeuroExamError, ValueError):
    """A computation hit a zero denominator or a constant series."""


class AllLowConfidenceError(DegenerateError):
    """No sample of a keypoint series reaches the confidence threshold."""


class FitError(DegenerateError):
    """A curve fit is ill-posed for the supplied points."""


class NoCyclesError(NeuroExamError, ValueError):
    """Fewer than two motion cycles could be detected."""


class SegmentationError(NeuroExamError, ValueError):
    """A stand-up-and-walk recording could not be segmented."""


class NoStandUpError(SegmentationError):
    """No stand-up phase was found."""


class EmptyMatrixError(NeuroExamError, ValueError):
    """No rows or columns remain in a feature matrix."""


class DegenerateFoldError(NeuroExamError, ValueError):
    """A cross-validation test fold lacks one of the two classes."""


class InsufficientDataError(NeuroExamError, ValueError):
    """Not enough complete subjects for a distance study."""


class ConvergenceError(NeuroExamError, RuntimeError):
    """An iterative numerical routine did not converge."""


class ConvergenceWarning(UserWarning):
    """An optimizer stopped improving before its iteration budget ran out."""
