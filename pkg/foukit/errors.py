"""Exception hierarchy shared by every foukit module."""

from typing import Any, Optional


class FoukitError(Exception):
    """Base class for all foukit errors."""


class DomainError(FoukitError, ValueError):
    """An argument lies outside the domain of the operation."""


class FilterError(DomainError):
    """A filter violates its declared moment conditions."""


class DataError(FoukitError, ValueError):
    """Input data is missing, malformed, too short or non-finite."""


class DegenerateSampleError(DataError):
    """The sample carries no variation the estimator can use."""


class NumericalFailureError(FoukitError, ArithmeticError):
    """A numerical routine failed to reach its tolerance."""


class CirculantEmbeddingError(NumericalFailureError):
    """The circulant embedding of a covariance has negative eigenvalues."""

    def __init__(self, min_eigenvalue: float, size: int):
        self.min_eigenvalue = min_eigenvalue
        self.size = size
        super().__init__(
            f"circulant embedding of size {size} is not nonnegative definite "
            f"(minimal eigenvalue {min_eigenvalue:.3e})"
        )


class SpectralTailError(NumericalFailureError):
    """The spectral tail bound exceeds the requested tolerance."""

    def __init__(self, bound: float, tolerance: float, cutoff: float):
        self.bound = bound
        self.tolerance = tolerance
        self.cutoff = cutoff
        super().__init__(
            f"spectral tail bound {bound:.3e} exceeds tolerance {tolerance:.3e} "
            f"at cutoff {cutoff:g}; use a larger cutoff_frequency"
        )


class OptimizerError(NumericalFailureError):
    """No optimizer start converged; carries the best incumbent."""

    def __init__(self, message: str, best: Optional[Any] = None):
        self.best = best
        super().__init__(message)
