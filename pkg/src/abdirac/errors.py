"""Exception types raised across the package."""


class AbDiracError(Exception):
    """Base class for all library errors."""


class DomainError(AbDiracError, ValueError):
    """A parameter lies outside the admissible domain."""


class SupercriticalError(AbDiracError):
    """The flux exceeds the critical field, so there is no ground state in the gap."""


class DegenerateError(AbDiracError):
    """The two roots of the square-completion quadratic coincide."""


class NoModeEigenvalue(AbDiracError):
    """A Fourier mode admits no gap eigenvalue of the generating form.

    ``reason`` is ``"negative-mode"`` for rejected negative indices and
    ``"coupling-too-large"`` when nu >= |c_ell(a)|.
    """

    def __init__(self, message, reason):
        super().__init__(message)
        self.reason = reason


class BadSpec(AbDiracError, ValueError):
    """Invalid grid specification."""


class BadGrid(AbDiracError, ValueError):
    """A grid is unusable for the requested discretization."""


class GridTooCoarse(AbDiracError, ValueError):
    """The grid does not resolve a feature of a trial profile."""


class NonIntegrable(AbDiracError, ArithmeticError):
    """An integrand is not integrable at the origin."""


class MaxIterations(AbDiracError):
    """An iterative search ran out of budget; ``best`` holds the best result so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NoCrossing(AbDiracError):
    """No gap eigenvalue was found in (-1, 1) for the requested mode."""


class StiffIntegration(AbDiracError):
    """The radial ODE integration failed (non-finite state)."""
