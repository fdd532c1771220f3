"""Exception hierarchy shared by every module."""


class PlyapError(Exception):
    """Base class for all errors raised by plyap."""


class DomainError(PlyapError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class UnsupportedCoefficientError(DomainError):
    """A formula that only holds for a constant unit coefficient was given another one."""


class ResourceError(PlyapError):
    """A construction would exceed a configured size cap."""


class IntegrationError(PlyapError):
    """The initial value integration could not reach the end of the interval."""

    def __init__(self, message, x_reached):
        super().__init__(f"{message} (reached x={x_reached!r})")
        self.x_reached = x_reached


class NoEigenvalueError(PlyapError):
    """The requested eigenvalue ladder is empty for the given weight."""


class SearchError(PlyapError):
    """Bracketing of an eigenvalue failed within the configured cap."""


class DegenerateDenominatorError(PlyapError, ZeroDivisionError):
    """A Rayleigh quotient denominator vanished."""
