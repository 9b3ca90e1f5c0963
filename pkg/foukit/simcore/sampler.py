"""Seeded samplers for fGn, exact FOU(p) paths and operator-built FOU(p) paths."""

import functools
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from scipy import linalg, signal, special

from foukit.errors import (
    CirculantEmbeddingError,
    DataError,
    DomainError,
    NumericalFailureError,
)
from foukit.model.covariance import acvf_sequence, k_coefficients
from foukit.model.fou_model import FouModel
from foukit.simcore.rng import SeedLike, as_generator
from foukit.special.fh import check_hurst

logger = logging.getLogger(__name__)

SIMULATION_METHODS = ("exact_gaussian", "operator_path")

# Burn-in defaults, in units of 1/λ₁
DEFAULT_BURN_IN_FACTOR = 10.0
MIN_BURN_IN_FACTOR = 5.0

# Relative size of negative circulant eigenvalues treated as rounding
EMBEDDING_TOLERANCE = 1.0e-10


@dataclass(frozen=True)
class SamplePath:
    """
    An equispaced sample X_Δ, …, X_{nΔ} on [0, T] with Δ = T/n.

    Samples sit at iΔ for i = 1..n; the origin itself is not observed.
    """

    values: np.ndarray
    horizon: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size < 2:
            raise DataError(f"a sample path needs at least 2 values, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise DataError("sample path contains non-finite values")
        horizon = float(self.horizon)
        if not math.isfinite(horizon) or horizon <= 0:
            raise DomainError(f"horizon T must be positive, got {self.horizon}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "horizon", horizon)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def delta(self) -> float:
        return self.horizon / self.n

    @property
    def times(self) -> np.ndarray:
        return np.arange(1, self.n + 1) * self.delta

    def rescaled(self, horizon: float) -> "SamplePath":
        """Same values placed on [0, horizon]."""
        return SamplePath(self.values, horizon)

    def head(self, count: int) -> "SamplePath":
        """First `count` values, keeping the spacing Δ."""
        if not 2 <= count <= self.n:
            raise DomainError(f"head length must lie in [2, {self.n}], got {count}")
        return SamplePath(self.values[:count], count * self.delta)

    def shifted(self, offset: float) -> "SamplePath":
        return SamplePath(self.values - offset, self.horizon)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "x": self.values})


@dataclass(frozen=True)
class SimConfig:
    """Sampler selection and operator-path discretization settings."""

    seed: int = 0
    method: str = "exact_gaussian"
    burn_in: Optional[float] = None  # None -> 10/λ₁
    inner_refinement: int = 4

    def __post_init__(self):
        if self.method not in SIMULATION_METHODS:
            raise DomainError(
                f"method must be one of {SIMULATION_METHODS}, got {self.method!r}"
            )
        if self.inner_refinement < 1:
            raise DomainError("inner_refinement must be a positive integer")
        if self.burn_in is not None and self.burn_in < 0:
            raise DomainError("burn_in must be nonnegative")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def resolved_burn_in(self, model: FouModel) -> float:
        """Burn-in length M for a model, enforcing M >= 5/λ₁."""
        lam1 = float(model.lambdas[0])
        burn_in = DEFAULT_BURN_IN_FACTOR / lam1 if self.burn_in is None else self.burn_in
        if burn_in < MIN_BURN_IN_FACTOR / lam1:
            raise DomainError(
                f"burn-in {burn_in:g} is below the floor 5/λ₁ = {MIN_BURN_IN_FACTOR / lam1:g}"
            )
        return burn_in


def fgn_autocovariance(hurst: float, sigma: float, delta: float, count: int) -> np.ndarray:
    """γ(k) = (σ²Δ^{2H}/2)(|k+1|^{2H} + |k−1|^{2H} − 2|k|^{2H}) for k = 0..count−1."""
    two_h = 2.0 * hurst
    k = np.arange(count, dtype=float)
    return (
        0.5
        * sigma**2
        * delta**two_h
        * (np.abs(k + 1) ** two_h + np.abs(k - 1) ** two_h - 2.0 * k**two_h)
    )


def circulant_sample(gamma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Draw a stationary Gaussian vector with autocovariance gamma[:-1].

    gamma holds γ(0..n); the Toeplitz covariance of size n is embedded in a
    circulant of size 2n whose eigenvalues come from one FFT.

    Raises:
        CirculantEmbeddingError: If an eigenvalue is negative beyond rounding
    """
    n = gamma.size - 1
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    size = row.size
    eigenvalues = np.fft.fft(row).real
    smallest = float(eigenvalues.min())
    if smallest < -EMBEDDING_TOLERANCE * float(eigenvalues.max()):
        raise CirculantEmbeddingError(smallest, size)
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    noise = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return np.fft.fft(np.sqrt(eigenvalues / size) * noise).real[:n]


def sample_fgn(
    hurst: float, sigma: float, n: int, delta: float, seed: SeedLike = 0
) -> np.ndarray:
    """
    Increments B_H(iΔ) − B_H((i−1)Δ) of σ·fBm by circulant embedding.

    Args:
        hurst: Hurst parameter in (0, 1)
        sigma: Scale
        n: Number of increments
        delta: Grid spacing Δ
        seed: Seed or Generator

    Returns:
        Array of n increments
    """
    check_hurst(hurst)
    if n < 1 or not delta > 0 or not sigma > 0:
        raise DomainError("need n >= 1, delta > 0 and sigma > 0")
    gamma = fgn_autocovariance(hurst, sigma, delta, n + 1)
    return circulant_sample(gamma, as_generator(seed))


@functools.lru_cache(maxsize=16)
def _acvf_table(model: FouModel, n: int, delta: float) -> np.ndarray:
    table = acvf_sequence(model, n + 1, delta)
    table.setflags(write=False)
    return table


@functools.lru_cache(maxsize=2)
def _cholesky_factor(model: FouModel, n: int, delta: float) -> np.ndarray:
    gram = linalg.toeplitz(_acvf_table(model, n, delta)[:n])
    try:
        factor = linalg.cholesky(gram, lower=True)
    except linalg.LinAlgError as err:
        raise NumericalFailureError(
            f"Gram matrix of {model} at spacing {delta:g} is not positive definite"
        ) from err
    factor.setflags(write=False)
    return factor


def sample_fou_exact(model: FouModel, n: int, T: float, seed: SeedLike = 0) -> SamplePath:
    """
    Exact stationary sample of a FOU(p) process at iT/n, i = 1..n.

    The autocovariance sequence is embedded in a circulant; if the embedding
    is not nonnegative definite the Toeplitz Gram matrix is factored instead.

    Args:
        model: FOU model
        n: Number of observations
        T: Horizon
        seed: Seed or Generator

    Returns:
        SamplePath on [0, T]
    """
    if n < 2 or not T > 0:
        raise DomainError("need n >= 2 and T > 0")
    delta = T / n
    rng = as_generator(seed)
    gamma = _acvf_table(model, n, delta)
    try:
        values = circulant_sample(gamma, rng)
    except CirculantEmbeddingError as err:
        logger.info("%s; using Cholesky factorization for %s", err, model)
        values = _cholesky_factor(model, n, delta) @ rng.standard_normal(n)
    return SamplePath(values, T)


def apply_operator(increments: np.ndarray, lam: float, order: int, step: float) -> np.ndarray:
    """
    Evaluate T_λ^{(order)}(y) after each increment of y on a grid of spacing δ.

    With I_j(t) = ∫ e^{−λ(t−s)} (t−s)^j / j! dy(s), the exact one-step
    recursion is I_j(t+δ) = e^{−λδ} Σ_{m≤j} δ^{j−m}/(j−m)! I_m(t) + ∫_t^{t+δ}…,
    the last integral taken by the trapezoid rule in the kernel. Each I_j is
    a first-order recursive filter driven by the lower orders, and
    T_λ^{(j)} = (−λ)^j I_j.

    Args:
        increments: Increments of the driving path, starting from rest
        lam: λ > 0
        order: h >= 0
        step: Grid spacing δ

    Returns:
        Array of T_λ^{(order)}(y) at the grid point after each increment
    """
    return _operator_orders(increments, lam, order, step)[order] * (-lam) ** order


def _operator_orders(increments: np.ndarray, lam: float, top: int, step: float):
    """I_0..I_top evaluated after each increment."""
    decay = math.exp(-lam * step)
    orders = []
    previous = []
    for j in range(top + 1):
        kernel_end = decay * step**j / special.factorial(j)
        drive = 0.5 * (kernel_end + (1.0 if j == 0 else 0.0)) * increments
        for m, prev in enumerate(previous):
            drive = drive + decay * step ** (j - m) / special.factorial(j - m) * prev
        current = signal.lfilter([1.0], [1.0, -decay], drive)
        orders.append(current)
        # Value before each increment, starting from rest
        previous.append(np.concatenate([[0.0], current[:-1]]))
    return orders


def operator_path_from_increments(
    model: FouModel, increments: np.ndarray, step: float
) -> np.ndarray:
    """
    Apply the FOU(p) operator composition to increments of σB_H.

    Distinct roots and single repeated roots use the expansion
    Σ_i K_i Σ_j C(p_i−1, j) T_{λ_i}^{(j)}; mixed multiplicities apply the
    operators one after the other.
    """
    if model.is_distinct or model.q == 1:
        weights = k_coefficients(model.lambdas)
        total = np.zeros_like(increments, dtype=float)
        for weight, root in zip(weights, model.roots):
            top = root.multiplicity - 1
            orders = _operator_orders(increments, root.value, top, step)
            for j in range(top + 1):
                total += (
                    weight * special.comb(top, j) * (-root.value) ** j * orders[j]
                )
        return total

    current = increments
    values = current
    for lam in model.expanded_lambdas():
        values = apply_operator(current, float(lam), 0, step)
        current = np.diff(values, prepend=0.0)
    return values


def sample_fou_operator_path(
    model: FouModel, n: int, T: float, cfg: SimConfig = SimConfig(), seed: SeedLike = None
) -> SamplePath:
    """
    Approximate FOU(p) path from a simulated fBm on [−M, T].

    The driving fBm is sampled at spacing Δ/inner_refinement, the (−∞, t]
    integrals are truncated at −M, and the operator recursions run on the
    fine grid; every inner_refinement-th value after the origin is kept.

    Args:
        model: FOU model
        n: Number of observations
        T: Horizon
        cfg: Burn-in and refinement settings
        seed: Seed or Generator (defaults to cfg.seed)

    Returns:
        SamplePath on [0, T]
    """
    if n < 2 or not T > 0:
        raise DomainError("need n >= 2 and T > 0")
    burn_in = cfg.resolved_burn_in(model)
    delta = T / n
    refinement = cfg.inner_refinement
    step = delta / refinement
    lead = int(math.ceil(burn_in / delta)) * refinement
    total = lead + n * refinement

    rng = as_generator(cfg.seed if seed is None else seed)
    increments = sample_fgn(model.hurst, model.sigma, total, step, rng)
    values = operator_path_from_increments(model, increments, step)
    keep = lead - 1 + refinement * np.arange(1, n + 1)
    return SamplePath(values[keep], T)


def simulate(model: FouModel, n: int, T: float, cfg: SimConfig = SimConfig(), seed: SeedLike = None) -> SamplePath:
    """Dispatch to the sampler named by cfg.method."""
    seed = cfg.seed if seed is None else seed
    if cfg.method == "operator_path":
        return sample_fou_operator_path(model, n, T, cfg, seed)
    return sample_fou_exact(model, n, T, seed)
