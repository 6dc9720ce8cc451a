"""Exception hierarchy.

The three intermediate classes map onto command-line exit codes: bad input
(2), exceeded size caps (4) and failed scaling fits (5).
"""
from __future__ import annotations


class RvbError(Exception):
    """Base class for all package errors."""


class InputError(RvbError, ValueError):
    """The request itself is malformed."""


class CapExceeded(RvbError):
    """The request is well formed but larger than a configured cap."""


class FitError(RvbError):
    """A scaling fit could not be produced."""


class NumericalError(RvbError, ArithmeticError):
    """A computed quantity violates a numerical invariant."""


class InvalidLattice(InputError):
    pass


class NoCoverings(InputError):
    pass


class UnsupportedFamily(InputError):
    pass


class OverlappingSets(InputError):
    pass


class SubsystemTooLarge(CapExceeded):
    pass


class TooLargeForExhaustive(CapExceeded):
    pass


class HeightTooLarge(CapExceeded):
    pass


class BasisBlowup(CapExceeded):
    pass


class NumericOverflow(NumericalError):
    pass


class SpectrumError(NumericalError):
    """Eigenvalues of a density matrix fall outside [0, 1] by more than the tolerance."""


class InsufficientSamples(FitError):
    pass


class DegenerateFit(FitError):
    """Raised when the scaling fit is degenerate.

    ``partial`` carries whatever could still be determined (for constant data
    this is the asymptote with a vanishing amplitude).
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
