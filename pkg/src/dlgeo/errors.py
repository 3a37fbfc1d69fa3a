"""Exception and warning types shared across the package."""


class DlgeoError(Exception):
    """Base class for all package-specific errors."""


class DomainError(DlgeoError):
    """Arguments lie outside the supported evaluation domain."""


class GeometryError(DlgeoError):
    """Constructed contours violate the required left/right ordering."""


class InvariantError(DlgeoError):
    """A structural invariant (e.g. contour-constant ordering) is violated."""


class CertificateError(DlgeoError):
    """An unbounded path segment has no decay certificate attached."""


class SingularityError(DlgeoError):
    """A Cauchy-type denominator is numerically zero."""


class ConvergenceError(DlgeoError):
    """A self-consistency refinement check failed to converge."""


class BudgetError(DlgeoError):
    """An evaluation would exceed the configured work budget."""


class BlowupError(DlgeoError):
    """The ODE solution left the stable branch (|u| exceeded the cap)."""


class TruncationWarning(UserWarning):
    """Estimated discarded series mass exceeds the requested tolerance."""
