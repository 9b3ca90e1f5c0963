"""
Two-stage estimation: filters give (H, σ), the Whittle contrast gives λ.

Either of H and σ may be fixed instead of estimated, which covers the
known-parameter mode (σ = 1 and/or H = 1/2) used for real series.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from foukit.errors import DomainError, NumericalFailureError
from foukit.estimate.filters import DAUBECHIES_2, FilterSpec
from foukit.estimate.hurst import estimate_h, estimate_sigma, hurst_in_range
from foukit.estimate.whittle import (
    DEFAULT_WHITTLE,
    FitReport,
    WeightSpec,
    WhittleConfig,
    asymptotic_lambda_cov,
    fit_lambda,
)
from foukit.simcore.sampler import SamplePath

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitOptions:
    """
    Which parameters are estimated and how.

    sigma/hurst set to a number fix that parameter; None estimates it with
    the filter. center removes the sample mean before anything else.
    """

    filt: FilterSpec = DAUBECHIES_2
    sigma: Optional[float] = None
    hurst: Optional[float] = None
    center: bool = True
    with_covariance: bool = False

    def __post_init__(self):
        if self.sigma is not None and not self.sigma > 0:
            raise DomainError(f"fixed sigma must be positive, got {self.sigma}")
        if self.hurst is not None and not hurst_in_range(self.hurst):
            raise DomainError(f"fixed H must lie in (0, 1), got {self.hurst}")


DEFAULT_FIT = FitOptions()


def center_path(path: SamplePath) -> SamplePath:
    return path.shifted(float(np.mean(path.values)))


def fit_fou(
    path: SamplePath,
    structure: Sequence[int],
    whittle: WhittleConfig = DEFAULT_WHITTLE,
    options: FitOptions = DEFAULT_FIT,
) -> FitReport:
    """
    Estimate (H, σ, λ) of a FOU model with the given multiplicities.

    Args:
        path: Equispaced sample on [0, T]
        structure: Multiplicities (p_1, …, p_q)
        whittle: λ search settings
        options: Fixed or estimated H and σ, filter, centring

    Returns:
        FitReport; asymptotic_cov is filled when options.with_covariance is set
        and the sandwich matrix exists

    Raises:
        DomainError: If the estimated H falls outside (0, 1)
        OptimizerError: If the λ search fails from every start
    """
    if options.center:
        path = center_path(path)

    if options.hurst is None:
        h = estimate_h(path, options.filt)
        if not hurst_in_range(h):
            raise DomainError(f"estimated H = {h:.4f} is outside (0, 1); λ cannot be fitted")
    else:
        h = options.hurst

    sigma = options.sigma if options.sigma is not None else estimate_sigma(path, options.filt, h)
    logger.debug("Stage one on n=%d, T=%g: H=%.4f, sigma=%.4f", path.n, path.horizon, h, sigma)

    report = fit_lambda(path, structure, sigma, h, whittle)
    report.hurst_estimated = options.hurst is None
    report.sigma_estimated = options.sigma is None

    if options.with_covariance:
        try:
            report.asymptotic_cov = asymptotic_lambda_cov(
                report.to_model(), WeightSpec.continuous(), path.horizon
            )
        except NumericalFailureError as err:
            report.diagnostics.append(f"asymptotic covariance unavailable: {err}")
            logger.warning("Asymptotic covariance unavailable: %s", err)
    return report
