"""Filter estimators of (H, σ) and the Whittle estimator of λ."""

from foukit.estimate.filters import (
    DAUBECHIES_2,
    FILTERS,
    INCREMENT,
    SECOND_DIFFERENCE,
    FilterSpec,
    dilate_filter,
    get_filter,
    quadratic_variation,
)
from foukit.estimate.hurst import estimate_h, estimate_h_sigma, estimate_sigma
from foukit.estimate.pipeline import FitOptions, fit_fou
from foukit.estimate.whittle import (
    DEFAULT_WHITTLE,
    FitReport,
    WeightSpec,
    WhittleConfig,
    asymptotic_lambda_cov,
    contrast_grid,
    fit_lambda,
    periodogram_discrete,
    periodogram_grid,
    whittle_contrast,
)

__all__ = [
    "DAUBECHIES_2",
    "DEFAULT_WHITTLE",
    "FILTERS",
    "INCREMENT",
    "SECOND_DIFFERENCE",
    "FilterSpec",
    "FitOptions",
    "FitReport",
    "WeightSpec",
    "WhittleConfig",
    "asymptotic_lambda_cov",
    "contrast_grid",
    "dilate_filter",
    "estimate_h",
    "estimate_h_sigma",
    "estimate_sigma",
    "fit_fou",
    "fit_lambda",
    "get_filter",
    "periodogram_discrete",
    "periodogram_grid",
    "quadratic_variation",
    "whittle_contrast",
]
