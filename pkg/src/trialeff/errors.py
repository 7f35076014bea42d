"""Exception hierarchy shared by every module.

``DomainError`` covers arguments outside a function's mathematical domain
and maps to CLI exit code 2.  ``DegenerateDataError`` covers data from
which the target quantity is unidentifiable (no control-arm cases) and
maps to exit code 3.
"""


class EstimationError(Exception):
    """Base class for every error raised by this package."""


class DomainError(EstimationError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateDataError(EstimationError):
    """Observed counts carry no information about the target quantity."""


class FalsePositiveParadoxError(DomainError):
    """Observed infection rate does not exceed the false positive rate."""


class ZeroCellError(DomainError):
    """A zero case count makes a classical interval undefined."""


class DegenerateDensityError(DomainError):
    """A density grid integrates to zero and cannot be normalized."""


class ConvergenceError(EstimationError):
    """An iterative numerical routine failed to converge."""


class ClampedModeWarning(UserWarning):
    """The closed-form mode fell outside [0, 1] and was clamped."""
