"""Exception hierarchy.

Input problems derive from :class:`InputError` (and ``ValueError``) so the
CLI can map them to the usage exit code; everything else signals either a
spectral obstruction at the requested point or a numerical failure.
"""


class KreinError(Exception):
    """Base class for all errors raised by this package."""


class InputError(KreinError, ValueError):
    """Raised when an argument is malformed or violates a precondition."""


class NonSquare(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class InvalidFundamentalSymmetry(InputError):
    """J is not a Hermitian involution."""


class RankDeficientBasis(InputError):
    pass


class InvalidRule(InputError):
    """A family generator rule violates its monotonicity contract."""


class ParseError(InputError):
    pass


class ValidationError(InputError):
    """An operator-spec document failed validation.

    ``key`` names the offending top-level (or nested) key.
    """

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class NotJSelfadjoint(InputError):
    pass


class MultiplicityTooLarge(InputError):
    pass


class SpectrumHit(KreinError):
    """The requested point lies within the guard distance of the spectrum."""


class BoundaryHit(KreinError):
    """An eigenvalue sits too close to the boundary of a spectral region."""


class NotAnEigenvalue(KreinError):
    pass


class NumericalBreakdown(KreinError):
    pass


class DegenerateForm(NumericalBreakdown):
    """The indefinite form on a root subspace came out degenerate."""


class TransportFailure(KreinError):
    """Eigenspaces of AB and BA failed to correspond within tolerance."""


class SelfadjointnessViolation(KreinError):
    """A product that must be J-selfadjoint is not (internal bug)."""
