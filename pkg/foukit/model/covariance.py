"""
Closed-form second-order structure of FOU(p) processes.

Every closed form below is a (confluent) divided difference, in u = λ², of

    g(u) = u^{p−1−H} f_H(√u · t)

scaled by σ²H/2. Distinct roots give the plain divided difference; repeated
roots give its limit, which brings in f_H′ and f_H″.
"""

import logging
import math
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from foukit.errors import DomainError
from foukit.model.fou_model import FouModel
from foukit.model.spectral import (
    DEFAULT_SPECTRAL_GRID,
    CovarianceGrid,
    SpectralGridConfig,
    acvf_via_spectrum,
)
from foukit.special.fh import DEFAULT_QUADRATURE, QuadratureConfig, f_h_with_derivatives

logger = logging.getLogger(__name__)


def k_coefficients(lambdas: Sequence[float]) -> np.ndarray:
    """
    Partial-fraction coefficients K_i = 1 / ∏_{j≠i}(1 − λ_j/λ_i).

    Args:
        lambdas: Distinct positive values, strictly ascending

    Returns:
        Array of K_i; they sum to one

    Raises:
        DomainError: On non-positive, repeated or unordered values
    """
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size == 0:
        raise DomainError("at least one λ is required")
    if np.any(lam <= 0) or np.any(np.diff(lam) <= 0):
        raise DomainError(f"λ values must be positive and strictly ascending, got {lam}")
    out = np.empty_like(lam)
    for i, value in enumerate(lam):
        others = np.delete(lam, i)
        out[i] = 1.0 / np.prod(1.0 - others / value)
    return out


def has_closed_form(model: FouModel) -> bool:
    """Closed forms cover distinct roots of any order and every model with p <= 3."""
    return model.is_distinct or model.p <= 3


def _fh_values(h: float, x: float, order: int, cfg: QuadratureConfig) -> Tuple[float, ...]:
    # Derivative slots are always multiplied by a power of t, so zero at the origin
    if x == 0.0:
        return (2.0 * special.gamma(2.0 * h),) + (0.0,) * order
    return f_h_with_derivatives(h, x, order, cfg)


def _acvf_distinct(model: FouModel, t: float, cfg: QuadratureConfig) -> float:
    """Divided-difference form for distinct roots, valid for every p."""
    h = model.hurst
    lam = model.lambdas
    exponent = 2 * model.p - 2.0 * h - 2.0
    total = 0.0
    for i, value in enumerate(lam):
        others = np.delete(lam, i)
        weight = value**exponent / np.prod(value**2 - others**2)
        total += weight * _fh_values(h, value * t, 0, cfg)[0]
    return total


def _acvf_double(alpha: float, h: float, t: float, cfg: QuadratureConfig) -> float:
    """FOU(α^(2)) without the σ²H/2 prefactor."""
    f0, f1 = _fh_values(h, alpha * t, 1, cfg)
    return alpha ** (-2.0 * h) * ((1.0 - h) * f0 + 0.5 * alpha * t * f1)


def _acvf_double_single(alpha: float, beta: float, h: float, t: float, cfg: QuadratureConfig) -> float:
    """FOU(α^(2), β) without the prefactor: g[a, a, b] with g(u) = u^{2−H} f_H(√u t)."""
    fa0, fa1 = _fh_values(h, alpha * t, 1, cfg)
    fb0 = _fh_values(h, beta * t, 0, cfg)[0]
    g_alpha = alpha ** (4.0 - 2.0 * h) * fa0
    g_beta = beta ** (4.0 - 2.0 * h) * fb0
    g_prime = (2.0 - h) * alpha ** (2.0 - 2.0 * h) * fa0 + 0.5 * alpha ** (3.0 - 2.0 * h) * t * fa1
    gap = alpha**2 - beta**2
    return (g_beta - g_alpha + g_prime * gap) / gap**2


def _acvf_triple(alpha: float, h: float, t: float, cfg: QuadratureConfig) -> float:
    """FOU(α^(3)) without the prefactor: g″(α²)/2."""
    f0, f1, f2 = _fh_values(h, alpha * t, 2, cfg)
    at = alpha * t
    bracket = (2.0 - h) * (1.0 - h) * f0 + (1.75 - h) * at * f1 + 0.25 * at * at * f2
    return 0.5 * alpha ** (-2.0 * h) * bracket


def _acvf_closed(model: FouModel, t: float, cfg: QuadratureConfig) -> float:
    prefactor = 0.5 * model.hurst
    if model.is_distinct:
        return prefactor * _acvf_distinct(model, t, cfg)
    h = model.hurst
    structure = model.multiplicities
    lam = model.lambdas
    if structure == (2,):
        return prefactor * _acvf_double(lam[0], h, t, cfg)
    if structure == (3,):
        return prefactor * _acvf_triple(lam[0], h, t, cfg)
    if structure == (2, 1):
        return prefactor * _acvf_double_single(lam[0], lam[1], h, t, cfg)
    if structure == (1, 2):
        return prefactor * _acvf_double_single(lam[1], lam[0], h, t, cfg)
    raise DomainError(f"no closed form for multiplicities {structure}")


def acvf(
    model: FouModel,
    t: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    grid: SpectralGridConfig = DEFAULT_SPECTRAL_GRID,
) -> float:
    """
    Autocovariance E(X₀X_t) of a FOU(p) process.

    Distinct roots use the divided-difference formula, repeated roots with
    p <= 3 use its confluent limits, and repeated roots with p >= 4 fall back
    to Fourier inversion of the spectral density.

    Args:
        model: FOU model
        t: Lag (the function is even in t)
        cfg: Quadrature tolerances for f_H
        grid: Spectral grid for the p >= 4 repeated-root fallback

    Returns:
        The autocovariance at lag t
    """
    t = abs(float(t))
    if not math.isfinite(t):
        raise DomainError(f"lag must be finite, got {t}")
    if not has_closed_form(model):
        return float(acvf_via_spectrum(model, [t], grid).values[0])
    return model.sigma**2 * _acvf_closed(model, t, cfg)


def acvf_grid(
    model: FouModel,
    lags: Iterable[float],
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    grid: SpectralGridConfig = DEFAULT_SPECTRAL_GRID,
) -> CovarianceGrid:
    """
    Autocovariances over ascending nonnegative lags.

    Args:
        model: FOU model
        lags: Ascending nonnegative lags
        cfg: Quadrature tolerances for f_H
        grid: Spectral grid for the repeated-root fallback

    Returns:
        CovarianceGrid
    """
    lags = np.asarray(list(lags), dtype=float)
    if not has_closed_form(model):
        return acvf_via_spectrum(model, lags, grid)
    scale = model.sigma**2
    values = np.array([scale * _acvf_closed(model, float(t), cfg) for t in lags])
    return CovarianceGrid(lags=lags, values=values)


def acvf_sequence(
    model: FouModel,
    count: int,
    delta: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    grid: SpectralGridConfig = DEFAULT_SPECTRAL_GRID,
) -> np.ndarray:
    """Autocovariances γ(kΔ) for k = 0..count−1."""
    if count < 1 or not delta > 0:
        raise DomainError("count must be positive and delta strictly positive")
    return acvf_grid(model, np.arange(count) * delta, cfg, grid).values


def variogram(model: FouModel, t: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """
    Variogram v(t) = E(X_t − X_0)² = 2(γ(0) − γ(t)).

    Near the origin v grows like |t|^{2H}, the power law the filter
    estimators exploit.
    """
    if t == 0:
        return 0.0
    return max(0.0, 2.0 * (acvf(model, 0.0, cfg) - acvf(model, t, cfg)))


def split_repeated_roots(model: FouModel, eps: float) -> FouModel:
    """
    Spread every repeated root α^(k) into α, α+ε, …, α+(k−1)ε.

    Raises:
        DomainError: If eps is not positive or the spread roots collide
    """
    if not (math.isfinite(eps) and eps > 0):
        raise DomainError(f"eps must be a positive real, got {eps}")
    values = []
    for root in model.roots:
        values.extend(root.value + k * eps for k in range(root.multiplicity))
    if any(b <= a for a, b in zip(values, values[1:])):
        raise DomainError(f"eps={eps} makes perturbed roots overlap neighbouring roots")
    return FouModel.from_lambdas(values, sigma=model.sigma, hurst=model.hurst)


def repeated_root_limit_check(
    base: Optional[FouModel],
    collapse_to: FouModel,
    eps: float,
    lags: Sequence[float] = (0.0, 1.0, 2.0),
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """
    Compare the distinct-root formula near coincidence with a repeated-root form.

    Args:
        base: Distinct-root model within eps of collapse_to, or None to spread
            collapse_to's repeated roots by eps
        collapse_to: Model with repeated roots
        eps: Perturbation size, strictly positive
        lags: Lags at which to compare
        cfg: Quadrature tolerances

    Returns:
        Maximum absolute deviation over the lags

    Raises:
        DomainError: If eps <= 0 or base does not match collapse_to
    """
    if not (math.isfinite(eps) and eps > 0):
        raise DomainError(f"eps must be a positive real, got {eps}")
    if base is None:
        base = split_repeated_roots(collapse_to, eps)
    if not base.is_distinct:
        raise DomainError("base model must have distinct roots")
    if base.p != collapse_to.p:
        raise DomainError(f"base has order {base.p}, collapse_to has order {collapse_to.p}")
    reach = collapse_to.p * eps
    targets = collapse_to.expanded_lambdas()
    if np.any(np.abs(base.lambdas - targets) > reach):
        raise DomainError(f"base roots are not within {reach:g} of the repeated roots")

    base = base.with_scale(sigma=collapse_to.sigma, hurst=collapse_to.hurst)
    deviations = [
        abs(acvf(base, t, cfg) - acvf(collapse_to, t, cfg)) for t in lags
    ]
    worst = max(deviations)
    logger.debug("Limit check %s -> %s: max deviation %.3e", base, collapse_to, worst)
    return worst
