"""Exception types raised across the package."""

import numpy as np


class SubNyquistError(Exception):
    """Base class for all package errors."""


class InvalidParameter(SubNyquistError, ValueError):
    """A parameter or parameter combination violates a documented constraint."""


class DomainError(InvalidParameter):
    """An evaluation point lies outside the domain of a signal."""


class RankError(SubNyquistError, np.linalg.LinAlgError):
    """A matrix that must be invertible is singular or badly conditioned."""
