"""Exception types raised across the package."""

import numpy as np


class ContractViolation(ValueError):
    """An argument broke an operation's precondition (overlap, sign, shape)."""


class DomainError(ValueError):
    """A scalar argument lies outside the domain where the quantity is defined."""


class DegenerateColumnError(ValueError):
    """A sample column has zero rank variance (constant values)."""


class SingularityError(np.linalg.LinAlgError):
    """A covariance block that must be inverted is numerically singular."""
