"""Exception taxonomy shared across the toolkit."""


class RareWeakError(Exception):
    """Base class for all toolkit errors."""


class DomainError(RareWeakError, ValueError):
    """Input outside the documented domain of an operation."""


class FactorizationError(RareWeakError):
    """A matrix factorization failed (non-positive-definite pivot, etc.)."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class NotPositiveDefiniteError(FactorizationError):
    """Symmetric matrix has an eigenvalue materially below zero."""


class CapacityError(RareWeakError):
    """A combinatorial or dense computation would exceed its configured cap."""


class DegeneracyError(RareWeakError):
    """A restricted Gram system is rank deficient within tolerance."""

    def __init__(self, message, index_set=None):
        super().__init__(message)
        self.index_set = tuple(index_set) if index_set is not None else None


class GenerationError(RareWeakError):
    """A random generator could not produce a valid draw (e.g. no PD repair)."""


class SolverError(RareWeakError):
    """A numeric solver could not bracket or reach a root."""


class ConfigError(RareWeakError, ValueError):
    """An experiment configuration failed validation."""
