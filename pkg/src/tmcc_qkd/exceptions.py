"""Exception types raised by the package."""


class TmccError(Exception):
    """Base class for all package errors."""


class DomainError(TmccError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ValidationError(TmccError, ValueError):
    """Malformed input: non-normalized PMFs, bad configs, length mismatches."""


class TruncationError(TmccError, RuntimeError):
    """A truncated Fock sum leaves more tail mass than the tolerance allows."""


class SolverError(TmccError, RuntimeError):
    """Root finding did not converge within its iteration cap."""
