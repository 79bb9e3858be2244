"""Custom exceptions for the entropy-witness package."""

from __future__ import annotations

from typing import Any


class EntropyWitnessError(Exception):
    """Base exception for entropy-witness errors."""

    pass


class ValidationError(EntropyWitnessError):
    """Raised when an input fails validation."""

    def __init__(self, message: str, field: str | None = None) -> None:
        """Initialize validation error.

        Parameters
        ----------
        message : str
            The error message
        field : str | None
            The field or argument that failed validation
        """
        super().__init__(message)
        self.field = field


class InvalidDistributionError(ValidationError):
    """Raised when a probability vector is not a valid distribution."""

    pass


class InvalidStateError(ValidationError):
    """Raised when a matrix is not a valid density matrix or Hermitian operator."""

    pass


class DimensionMismatchError(ValidationError):
    """Raised when operands have incompatible shapes."""

    pass


class ConfigurationError(EntropyWitnessError):
    """Raised when configuration is invalid."""

    pass


class ParseError(EntropyWitnessError):
    """Raised when a command-line value or data file cannot be parsed."""

    def __init__(self, message: str, source: str | None = None) -> None:
        """Initialize parse error.

        Parameters
        ----------
        message : str
            The error message
        source : str | None
            The text or file that failed to parse
        """
        super().__init__(message)
        self.source = source


class InfeasibleError(EntropyWitnessError):
    """Raised when a witness value is outside the attainable range."""

    def __init__(
        self, message: str, value: float | None = None, bound: float | None = None
    ) -> None:
        """Initialize infeasibility error.

        Parameters
        ----------
        message : str
            The error message
        value : float | None
            The requested witness value
        bound : float | None
            The bound it violates
        """
        super().__init__(message)
        self.value = value
        self.bound = bound


class ConvergenceError(EntropyWitnessError):
    """Raised when an iterative solver fails to reach its tolerance."""

    def __init__(
        self,
        message: str,
        best_residual: float | None = None,
        best: Any = None,
    ) -> None:
        """Initialize convergence error.

        Parameters
        ----------
        message : str
            The error message
        best_residual : float | None
            Smallest constraint residual (or objective change) reached
        best : Any
            Best iterate found before giving up
        """
        super().__init__(message)
        self.best_residual = best_residual
        self.best = best


class EnumerationLimitError(EntropyWitnessError):
    """Raised when an enumeration or combination scan would be too large."""

    def __init__(
        self, message: str, count: int | None = None, limit: int | None = None
    ) -> None:
        """Initialize enumeration limit error.

        Parameters
        ----------
        message : str
            The error message
        count : int | None
            The number of items the request would produce
        limit : int | None
            The configured limit
        """
        super().__init__(message)
        self.count = count
        self.limit = limit
