"""Filter-based estimators of H and σ."""

import logging
import math
from typing import Tuple

import numpy as np

from foukit.errors import DegenerateSampleError, FilterError
from foukit.estimate.filters import DAUBECHIES_2, FilterSpec, dilate_filter, quadratic_variation
from foukit.simcore.sampler import SamplePath

logger = logging.getLogger(__name__)

# Estimators divide each filtered sum of squares by its own window count
ESTIMATOR_NORMALIZATION = "windows"


def hurst_in_range(h: float) -> bool:
    return 0.0 < h < 1.0


def variation_ratio(path: SamplePath, filt: FilterSpec = DAUBECHIES_2) -> float:
    """
    Return V_{n,a²} / V_{n,a}, each a mean over its own windows.

    Raises:
        DegenerateSampleError: If either quadratic variation is zero
    """
    v_a = quadratic_variation(path, filt, ESTIMATOR_NORMALIZATION)
    v_a2 = quadratic_variation(path, dilate_filter(filt), ESTIMATOR_NORMALIZATION)
    if not (v_a > 0 and v_a2 > 0):
        raise DegenerateSampleError(
            "zero quadratic variation: the sample is a polynomial of degree "
            f"below {filt.order} on the filter windows"
        )
    return v_a2 / v_a


def estimate_h(path: SamplePath, filt: FilterSpec = DAUBECHIES_2) -> float:
    """
    Estimate H by Ĥ = ½ log₂(V_{n,a²} / V_{n,a}).

    The estimate is not clamped; values outside (0, 1) are returned with a
    logged warning and refused by the λ fitting stage.

    Args:
        path: Equispaced sample
        filt: Filter of order at least 2

    Returns:
        Ĥ

    Raises:
        FilterError: If the filter order is below 2
        DegenerateSampleError: If a quadratic variation vanishes
    """
    if filt.order < 2:
        raise FilterError(f"estimating H needs a filter of order >= 2, got {filt.order}")
    h_hat = 0.5 * math.log2(variation_ratio(path, filt))
    if not hurst_in_range(h_hat):
        logger.warning("Estimated H = %.4f lies outside (0, 1)", h_hat)
    return h_hat


def filter_lag_sum(filt: FilterSpec, h: float) -> float:
    """Σ_i Σ_j a_i a_j |i−j|^{2H}."""
    a = filt.array
    idx = np.arange(a.size)
    lags = np.abs(idx[:, None] - idx[None, :]).astype(float)
    return float(a @ (lags ** (2.0 * h)) @ a)


def sigma_from_variation(v: float, delta: float, filt: FilterSpec, h_hat: float) -> float:
    """
    σ̂ = (−2V / (Δ^{2Ĥ} Σ_i Σ_j a_i a_j |i−j|^{2Ĥ}))^{1/2}.

    Raises:
        FilterError: If the double sum is not negative
    """
    if not hurst_in_range(h_hat):
        raise FilterError(f"σ estimation needs H in (0, 1), got {h_hat:.4f}")
    lag_sum = filter_lag_sum(filt, h_hat)
    if lag_sum >= 0:
        raise FilterError(
            f"Σ a_i a_j |i-j|^(2H) = {lag_sum:.3e} must be negative for H={h_hat:.4f}"
        )
    return math.sqrt(-2.0 * v / (delta ** (2.0 * h_hat) * lag_sum))


def estimate_sigma(path: SamplePath, filt: FilterSpec, h_hat: float) -> float:
    """
    Estimate σ from the window mean of the squared filtered sample.

    Args:
        path: Equispaced sample, Δ = T/n
        filt: Filter a
        h_hat: Estimate (or known value) of H

    Returns:
        σ̂ > 0
    """
    v = quadratic_variation(path, filt, ESTIMATOR_NORMALIZATION)
    return sigma_from_variation(v, path.delta, filt, h_hat)


def estimate_h_sigma(path: SamplePath, filt: FilterSpec = DAUBECHIES_2) -> Tuple[float, float]:
    """Estimate (Ĥ, σ̂) with the same filter."""
    h_hat = estimate_h(path, filt)
    return h_hat, estimate_sigma(path, filt, h_hat)
