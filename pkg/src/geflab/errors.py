"""Exception types raised across geflab."""


class GefError(Exception):
    """Base class for every library error."""


class DomainError(GefError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegreeTooSmallError(DomainError):
    """The truncation degree is too small for the requested radius."""


class CertificationError(GefError):
    """A disc or circle leaves the region where the truncation is certified."""


class DegenerateInputError(GefError, ValueError):
    """The input function is identically zero (or vanishes where it must not)."""


class SingularGridError(GefError):
    """A quadrature node landed exactly on a zero of the function."""


class NotInOmegaError(GefError):
    """Coefficients violate the constraints of the hole-forcing event."""


class ConvergenceError(GefError):
    """An iterative solver did not converge; ``partial`` holds its last iterate."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
