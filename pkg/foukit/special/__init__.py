"""Special functions behind the FOU(p) autocovariances."""

from foukit.special.fh import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    check_hurst,
    damped_integral,
    f_h,
    f_h_array,
    f_h_d1,
    f_h_d2,
    f_h_with_derivatives,
    fh_terms,
    upper_gamma_scaled,
)

__all__ = [
    "DEFAULT_QUADRATURE",
    "QuadratureConfig",
    "check_hurst",
    "damped_integral",
    "f_h",
    "f_h_array",
    "f_h_d1",
    "f_h_d2",
    "f_h_with_derivatives",
    "fh_terms",
    "upper_gamma_scaled",
]
