"""Finite filters and their quadratic variations."""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from foukit.errors import DataError, DomainError, FilterError
from foukit.simcore.sampler import SamplePath

# Moments below this (relative to Σ|a_i| i^l) count as zero
MOMENT_TOLERANCE = 1.0e-10

# Divisors of the filtered sum of squares: the sample size n, or the n−k windows
NORMALIZATIONS = ("sample", "windows")


@dataclass(frozen=True)
class FilterSpec:
    """
    A filter a = (a_0, …, a_k) of declared order L.

    Order L means Σ a_i i^l = 0 for l < L and Σ a_i i^L ≠ 0, so the filter
    annihilates polynomials of degree below L. The conditions are checked
    at construction.
    """

    coefficients: Tuple[float, ...]
    order: int
    name: str = ""

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients)
        if len(coefficients) < 2:
            raise FilterError("a filter needs at least two coefficients")
        if not all(math.isfinite(c) for c in coefficients):
            raise FilterError("filter coefficients must be finite")
        if int(self.order) != self.order or self.order < 1:
            raise FilterError(f"filter order must be a positive integer, got {self.order}")
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "order", int(self.order))

        a = self.array
        idx = np.arange(a.size, dtype=float)
        for power in range(self.order + 1):
            moment = float(np.sum(a * idx**power))
            scale = max(1.0, float(np.sum(np.abs(a) * idx**power)))
            vanishes = abs(moment) <= MOMENT_TOLERANCE * scale
            if power < self.order and not vanishes:
                raise FilterError(
                    f"moment {power} of filter {coefficients} is {moment:.3e}, "
                    f"not zero as order {self.order} requires"
                )
            if power == self.order and vanishes:
                raise FilterError(
                    f"moment {power} of filter {coefficients} vanishes; "
                    f"declared order {self.order} is too low"
                )

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=float)

    @property
    def k(self) -> int:
        """Filter length minus one."""
        return len(self.coefficients) - 1

    @classmethod
    def from_json(
        cls, source: Union[str, Sequence[float]], order: Optional[int] = None
    ) -> "FilterSpec":
        """
        Load a filter from a JSON array (text, file path or sequence).

        The declared order defaults to the number of vanishing moments.
        """
        if isinstance(source, str):
            path = Path(source)
            text = path.read_text() if path.exists() else source
            try:
                source = json.loads(text)
            except json.JSONDecodeError as err:
                raise DataError(f"filter is not a JSON array: {err}") from err
        if isinstance(source, dict):
            order = source.get("order", order)
            source = source.get("coefficients", [])
        coefficients = [float(c) for c in source]
        if order is None:
            order = vanishing_moments(coefficients)
        return cls(tuple(coefficients), order)


def vanishing_moments(coefficients: Sequence[float]) -> int:
    """Number of leading moments of the filter that vanish."""
    a = np.asarray(coefficients, dtype=float)
    idx = np.arange(a.size, dtype=float)
    count = 0
    while count < a.size:
        moment = float(np.sum(a * idx**count))
        scale = max(1.0, float(np.sum(np.abs(a) * idx**count)))
        if abs(moment) > MOMENT_TOLERANCE * scale:
            break
        count += 1
    if count == 0:
        raise FilterError(f"filter {list(coefficients)} does not annihilate constants")
    return count


_DAUBECHIES_RAW = (
    0.4829629131445341,
    -0.8365163037378077,
    0.2241438680420134,
    0.1294095225512603,
)

DAUBECHIES_2 = FilterSpec(
    tuple(c / math.sqrt(2.0) for c in _DAUBECHIES_RAW), order=2, name="daubechies2"
)
INCREMENT = FilterSpec((1.0, -1.0), order=1, name="increment")
SECOND_DIFFERENCE = FilterSpec((1.0, -2.0, 1.0), order=2, name="second_difference")

# Filter registry
FILTERS: Dict[str, FilterSpec] = {
    "daubechies2": DAUBECHIES_2,
    "increment": INCREMENT,
    "second_difference": SECOND_DIFFERENCE,
}


def get_filter(name_or_json: str) -> FilterSpec:
    """
    Resolve a registered filter name, or parse a JSON array.

    Raises:
        DataError: If the argument is neither a known name nor valid JSON
    """
    if name_or_json in FILTERS:
        return FILTERS[name_or_json]
    return FilterSpec.from_json(name_or_json)


def dilate_filter(filt: FilterSpec) -> FilterSpec:
    """Return a² = (a_0, 0, a_1, 0, …, 0, a_k), of the same order."""
    a = filt.array
    dilated = np.zeros(2 * a.size - 1)
    dilated[::2] = a
    name = f"{filt.name}^2" if filt.name else ""
    return FilterSpec(tuple(dilated), filt.order, name)


def _values(path: Union[SamplePath, Sequence[float]]) -> np.ndarray:
    if isinstance(path, SamplePath):
        return path.values
    return np.asarray(path, dtype=float).ravel()


def quadratic_variation(
    path: Union[SamplePath, Sequence[float]], filt: FilterSpec, normalization: str = "sample"
) -> float:
    """
    V_{n,a} = (1/n) Σ_i (Σ_j a_j X_{i+j})² over the n−k windows inside the sample.

    With normalization="windows" the sum is divided by the number of
    windows n−k instead, so V_{n,a} and V_{n,a²} are both window means.

    Args:
        path: SamplePath or raw values
        filt: Filter a
        normalization: "sample" (divide by n) or "windows" (divide by n−k)

    Returns:
        Nonnegative quadratic variation

    Raises:
        DomainError: If the sample is not longer than k
    """
    if normalization not in NORMALIZATIONS:
        raise DomainError(f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")
    values = _values(path)
    n = values.size
    if n <= filt.k:
        raise DomainError(f"filter needs n > k, got k={filt.k} and n={n}")
    filtered = np.correlate(values, filt.array, mode="valid")
    divisor = n if normalization == "sample" else filtered.size
    return float(np.dot(filtered, filtered) / divisor)
