"""Exception hierarchy.

Every error carries a stable string ``code`` and a process ``exit_code`` used
by the command-line front end. Exit codes are part of the public interface;
do not renumber them.
"""

from __future__ import annotations


class RMTNoiseError(Exception):
    code = "error"
    exit_code = 1


class InvalidArgumentError(RMTNoiseError, ValueError):
    code = "invalid-argument"
    exit_code = 3


class ParseError(RMTNoiseError, ValueError):
    code = "parse-error"
    exit_code = 4


class InsufficientSamplesError(RMTNoiseError, ValueError):
    code = "insufficient-samples"
    exit_code = 5


class InvalidMatrixError(RMTNoiseError, ValueError):
    code = "invalid-matrix"
    exit_code = 6


class DegenerateSpectrumError(RMTNoiseError, ValueError):
    """Too few eigenvalues above the rank tolerance to estimate anything."""

    code = "degenerate-spectrum"
    exit_code = 7


class DegenerateFloorError(DegenerateSpectrumError):
    """The smallest retained eigenvalue is numerically zero."""

    code = "degenerate-floor"
    exit_code = 8


class DegenerateSpikeError(DegenerateSpectrumError):
    code = "degenerate-spike"
    exit_code = 9


class DegenerateShapeError(RMTNoiseError, ValueError):
    """The corrected Tracy-Widom scale is undefined for this (N, s)."""

    code = "degenerate-shape"
    exit_code = 10


class DegenerateAspectError(RMTNoiseError, ValueError):
    code = "degenerate-aspect"
    exit_code = 11


class InvalidLevelError(RMTNoiseError, ValueError):
    code = "invalid-level"
    exit_code = 12


class NoNoiseSubspaceError(RMTNoiseError):
    code = "no-noise-subspace"
    exit_code = 13


class EmptyNoiseSetError(RMTNoiseError, ValueError):
    code = "empty-noise-set"
    exit_code = 14


class UnsupportedRegimeError(RMTNoiseError, ValueError):
    code = "unsupported-regime"
    exit_code = 15


class UnsupportedFormatError(RMTNoiseError, ValueError):
    code = "unsupported-format"
    exit_code = 16


class ImageTooSmallError(RMTNoiseError, ValueError):
    code = "image-too-small"
    exit_code = 17


ALL_ERRORS = (
    InvalidArgumentError,
    ParseError,
    InsufficientSamplesError,
    InvalidMatrixError,
    DegenerateSpectrumError,
    DegenerateFloorError,
    DegenerateSpikeError,
    DegenerateShapeError,
    DegenerateAspectError,
    InvalidLevelError,
    NoNoiseSubspaceError,
    EmptyNoiseSetError,
    UnsupportedRegimeError,
    UnsupportedFormatError,
    ImageTooSmallError,
)
