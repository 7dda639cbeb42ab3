"""Exception hierarchy and exit-code mapping shared by the library and the CLI."""

from __future__ import annotations


class AgofError(Exception):
    """Base class for every error raised deliberately by this package."""

    code = "INTERNAL"
    exit_code = 3


class DomainError(AgofError):
    """An argument is outside the mathematical domain of the operation."""

    code = "DOMAIN"
    exit_code = 2


class UnsupportedError(AgofError):
    """The requested combination (family, operation) is not provided."""

    code = "UNSUPPORTED"
    exit_code = 2


class InputError(AgofError):
    """Malformed user input: files, model strings, CLI values."""

    code = "INPUT"
    exit_code = 2


class InsufficientDataError(AgofError):
    """Too few observations for the requested fit or test."""

    code = "INSUFFICIENT_DATA"
    exit_code = 2


class DegenerateDataError(AgofError):
    """Data admits no valid fit (e.g. zero variance where spread is required)."""

    code = "DEGENERATE_DATA"
    exit_code = 3


class DegenerateFitError(AgofError):
    """An iterative fit collapsed (every restart pinned at the variance floor)."""

    code = "DEGENERATE_FIT"
    exit_code = 3


class BootstrapDegeneracyError(AgofError):
    """Too many bootstrap replicates failed to refit."""

    code = "BOOTSTRAP_DEGENERACY"
    exit_code = 3


class PrecisionError(AgofError):
    """The quadrature could not certify the requested error bound.

    Carries the bound that was achieved so callers can decide whether the
    partial answer is still useful.
    """

    code = "PRECISION"
    exit_code = 3

    def __init__(self, message: str, achieved_bound: float = float("nan")):
        super().__init__(message)
        self.achieved_bound = achieved_bound
