"""Exception hierarchy shared by all modules.

Every error raised on purpose by the library derives from
:class:`FermiChainError`, so callers (notably the CLI) can separate
computational failures from programming mistakes.
"""


class FermiChainError(Exception):
    """Base class for all library errors."""


class ConstraintViolation(FermiChainError, ValueError):
    """Coupling data violate a structural constraint.

    Parameters
    ----------
    message : str
        Human readable explanation.
    index : int, optional
        Coupling index ``l`` at which the violation was detected.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DomainError(FermiChainError, ValueError):
    """An argument lies outside the domain of an operation."""


class NumericalConsistencyError(FermiChainError, ArithmeticError):
    """A quantity that must be real or non-negative is not, beyond tolerance."""


class StructureError(FermiChainError):
    """Root structure of the spectral polynomial is inconsistent."""


class DegeneracyError(StructureError):
    """Roots coincide where the construction requires simple roots."""


class UnsupportedCaseError(FermiChainError):
    """The requested construction does not cover this input class."""


class PoleError(FermiChainError, ZeroDivisionError):
    """A Möbius map was evaluated at its pole.

    Parameters
    ----------
    z : complex
        The offending point.
    """

    def __init__(self, message, z=None):
        super().__init__(message)
        self.z = z


class AdmissibilityError(FermiChainError):
    """A Möbius map does not act admissibly on a chain.

    Parameters
    ----------
    root : complex, optional
        A root of the spectral polynomial that was mapped to the wrong side
        of the unit circle, or broke the quartet structure.
    """

    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class FlowSingularityError(FermiChainError, ZeroDivisionError):
    """The coupling flow hits a vanishing denominator."""


class DiscontinuityError(FermiChainError):
    """The ground-state symbol was requested exactly on a jump."""


class AccuracyError(FermiChainError):
    """A numerical procedure could not reach the requested accuracy."""


class IntegrationError(AccuracyError):
    """A contour or path integral failed."""


class ThetaNullError(FermiChainError, ZeroDivisionError):
    """A theta function used as normaliser vanishes."""


class OrderingError(FermiChainError):
    """Branch points are not ordered as an operation requires."""


class ContourError(FermiChainError):
    """The integration contour meets a singularity of the integrand."""


class FitError(FermiChainError):
    """A curve family is too short or too noisy for a stable fit."""


class ShapeError(FermiChainError, ValueError):
    """Inputs have inconsistent lengths or counts."""
