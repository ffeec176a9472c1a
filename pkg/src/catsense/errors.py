"""Exception types raised across the package."""


class CatsenseError(Exception):
    """Base class for all package errors."""


class DegenerateBias(CatsenseError, ValueError):
    """Signal-to-noise ratio requested where P_g(1 - P_g) vanishes."""


class NoInteriorMaximum(CatsenseError, ValueError):
    """R(D) is monotone on the searched range."""


class ResourceLimit(CatsenseError):
    """Required Fock cutoff exceeds the configured ceiling."""


class TruncationTooSmall(CatsenseError, ValueError):
    """Fock cutoff too small for the requested coherent amplitude."""


class StepSizeFailure(CatsenseError):
    """Integrator failed its step-halving convergence check."""


class InvariantViolation(CatsenseError):
    """A physical invariant (unitarity, trace, hermiticity, positivity) was broken."""


class UnsupportedShape(CatsenseError, ValueError):
    """Result cannot be rendered: wrong number of varying axes."""


class UsageError(CatsenseError):
    """Bad command-line or config-file input."""
