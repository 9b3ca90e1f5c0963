"""FOU(p) parameter object and its second-order structure."""

from foukit.model.covariance import (
    acvf,
    acvf_grid,
    acvf_sequence,
    has_closed_form,
    k_coefficients,
    repeated_root_limit_check,
    split_repeated_roots,
    variogram,
)
from foukit.model.fou_model import FouModel, FouRoot
from foukit.model.spectral import (
    DEFAULT_SPECTRAL_GRID,
    CovarianceGrid,
    SpectralGridConfig,
    acvf_via_spectrum,
    log_spectral_density,
    spectral_density,
)

__all__ = [
    "DEFAULT_SPECTRAL_GRID",
    "CovarianceGrid",
    "FouModel",
    "FouRoot",
    "SpectralGridConfig",
    "acvf",
    "acvf_grid",
    "acvf_sequence",
    "acvf_via_spectrum",
    "has_closed_form",
    "k_coefficients",
    "log_spectral_density",
    "repeated_root_limit_check",
    "spectral_density",
    "split_repeated_roots",
    "variogram",
]
