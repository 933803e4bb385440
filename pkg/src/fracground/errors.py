"""Exception hierarchy shared by all modules."""


class FracgroundError(Exception):
    """Base class for all package errors."""


class DegenerateDomain(FracgroundError):
    """Domain has empty interior (or invalid geometry parameters)."""


class TooCoarse(FracgroundError):
    """Lattice spacing leaves fewer than the minimum number of interior nodes."""


class NotOnBoundary(FracgroundError):
    """Probe anchor does not lie on the domain boundary within tolerance."""


class UnsupportedBoundary(FracgroundError):
    """Boundary normal is undefined at the requested point (box corner)."""


class UnsupportedDomain(FracgroundError):
    """Operation has no closed form for this domain variant."""


class CriticalDimension(FracgroundError):
    """N <= p*s: the kernel exponent leaves no subcritical range."""


class GridMismatch(FracgroundError):
    """Field and weights were built on different grids."""


class ZeroField(FracgroundError):
    """Operation undefined for the identically-zero field."""


class InvalidExponent(FracgroundError):
    """Lebesgue exponent outside the admissible range."""


class InvalidTheta(FracgroundError):
    """Truncation radius parameter must exceed 1."""


class PoleEvaluation(FracgroundError):
    """Inversion evaluated at its pole."""


class NotAnnulus(FracgroundError):
    """Check requires an origin-centered annulus."""


class NotRadialDomain(FracgroundError):
    """Radial solver requires an origin-centered ball or annulus."""


class ZeroMeasure(FracgroundError):
    """Concentration analysis undefined for a zero measure."""


class NotConverged(FracgroundError):
    """Solver hit the iteration cap before reaching tolerance."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(FracgroundError):
    """Run configuration failed validation."""


class FieldIOError(FracgroundError):
    """Field file could not be read or written."""


class FormatError(FieldIOError):
    """Field file is malformed; ``offset`` points at the defect."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset
