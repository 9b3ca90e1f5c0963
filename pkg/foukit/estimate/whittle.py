"""
Discretized Whittle estimation of the λ parameters.

The contrast is the Riemann sum over the frequencies x_i = iT/n

    U(λ) = (T/n) Σ_i (1/2π)(log f(x_i) + I(x_i)/f(x_i)) w(x_i)

with the discretized periodogram I(x) = (T/2π)|(1/n) Σ_j e^{ijTx/n} X_j|².
λ is searched over a box with ordering gaps λ_{i+1} ≥ λ_i + min_gap.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, optimize, signal, special
from scipy.stats import qmc

from foukit.errors import DomainError, NumericalFailureError, OptimizerError
from foukit.model.fou_model import FouModel
from foukit.simcore.sampler import SamplePath
from foukit.special.fh import check_hurst

logger = logging.getLogger(__name__)

OPTIMIZERS = ("nelder-mead", "grid-refine")
PERIODOGRAM_METHODS = ("direct", "czt")

# Weight on squared distance to the feasible set
_PENALTY = 1.0e6
# Nodes x observations evaluated per block in the direct periodogram
_BLOCK_ELEMENTS = 2_000_000
# Condition number beyond which W₁ is treated as singular
_SINGULAR_CONDITION = 1.0e12
# Upper bound on the points of the geometric start lattice
_LATTICE_BUDGET = 400

BoxLike = Union[Tuple[float, float], Sequence[Tuple[float, float]]]


@dataclass(frozen=True)
class WeightSpec:
    """Weight w(x) = |x|^a / (1 + |x|^b)."""

    exp_a: float
    exp_b: float

    def __post_init__(self):
        if not (self.exp_a >= 0 and math.isfinite(self.exp_a)):
            raise DomainError(f"weight exponent a must be nonnegative, got {self.exp_a}")
        if not (self.exp_b > 0 and math.isfinite(self.exp_b)):
            raise DomainError(f"weight exponent b must be positive, got {self.exp_b}")

    @classmethod
    def default_for_order(cls, p: int) -> "WeightSpec":
        """w(x) = |x|^{2p} / (1 + |x|^{2p+3})."""
        return cls(2.0 * p, 2.0 * p + 3.0)

    @classmethod
    def continuous(cls, exp_b: float = 3.0) -> "WeightSpec":
        """The weight |x| / (1 + |x|^b), b > 2, of the continuous-time contrast."""
        if not exp_b > 2:
            raise DomainError(f"the continuous-time weight needs b > 2, got {exp_b}")
        return cls(1.0, exp_b)

    @property
    def continuous_only(self) -> bool:
        """True for the continuous-time form, which the discretized contrast rejects."""
        return self.exp_a == 1.0 and self.exp_b > 2.0

    def admissible_for(self, p: int) -> bool:
        return self.exp_a >= 2 * p and self.exp_b >= self.exp_a + 3

    def __call__(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        return ax**self.exp_a / (1.0 + ax**self.exp_b)


@dataclass(frozen=True)
class WhittleConfig:
    """
    Settings of the λ search.

    lambda_box is a single (lo, hi) pair for every coordinate or one pair
    per coordinate. freq_nodes=None uses all n frequencies iT/n; a smaller
    value keeps only the first freq_nodes of them. lattice_start adds the
    best point of a geometric lattice of the box to the Nelder–Mead starts.
    """

    weight: Optional[WeightSpec] = None
    lambda_box: BoxLike = (0.01, 1.5)
    min_gap: float = 0.01
    optimizer: str = "nelder-mead"
    freq_nodes: Optional[int] = None
    multistart: int = 8
    grid_points: int = 50
    max_iter: int = 4000
    xatol: float = 1.0e-7
    fatol: float = 1.0e-10
    periodogram_method: str = "direct"
    start_seed: int = 0
    lattice_start: bool = True
    threads: int = 1

    def __post_init__(self):
        box = self.lambda_box
        if len(box) == 2 and all(np.ndim(b) == 0 for b in box):
            box = (float(box[0]), float(box[1]))
        else:
            box = tuple((float(lo), float(hi)) for lo, hi in box)
        object.__setattr__(self, "lambda_box", box)
        if not self.min_gap > 0:
            raise DomainError("min_gap must be positive")
        for lo, hi in self._pairs():
            if lo < self.min_gap:
                raise DomainError(f"box lower bound {lo} must be >= min_gap {self.min_gap}")
            if not hi > lo:
                raise DomainError(f"box upper bound {hi} must exceed lower bound {lo}")
        if self.optimizer not in OPTIMIZERS:
            raise DomainError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.periodogram_method not in PERIODOGRAM_METHODS:
            raise DomainError(
                f"periodogram_method must be one of {PERIODOGRAM_METHODS}, "
                f"got {self.periodogram_method!r}"
            )
        if self.freq_nodes is not None and self.freq_nodes < 1:
            raise DomainError("freq_nodes must be a positive integer")
        if self.multistart < 1 or self.grid_points < 2 or self.threads < 1:
            raise DomainError("multistart, grid_points and threads must be positive")

    def _pairs(self) -> List[Tuple[float, float]]:
        box = self.lambda_box
        if isinstance(box[0], tuple):
            return list(box)
        return [box]

    def bounds(self, q: int) -> List[Tuple[float, float]]:
        """Per-coordinate (lo, hi) for q distinct λ values."""
        pairs = self._pairs()
        if len(pairs) == 1:
            return pairs * q
        if len(pairs) != q:
            raise DomainError(f"lambda_box has {len(pairs)} pairs, the model has {q} roots")
        return pairs

    def weight_for(self, p: int) -> WeightSpec:
        """The configured weight, or the default for order p."""
        return self.weight if self.weight is not None else WeightSpec.default_for_order(p)


DEFAULT_WHITTLE = WhittleConfig()


@dataclass
class FitReport:
    """Estimates of (H, σ, λ) with the optimizer outcome."""

    h_hat: float
    sigma_hat: float
    lambda_hat: Tuple[float, ...]
    multiplicities: Tuple[int, ...]
    contrast_value: float
    converged: bool
    n_evals: int
    asymptotic_cov: Optional[np.ndarray] = None
    horizon: Optional[float] = None
    n: Optional[int] = None
    hurst_estimated: bool = True
    sigma_estimated: bool = True
    loglik: Optional[float] = None
    aic: Optional[float] = None
    diagnostics: List[str] = field(default_factory=list)

    def to_model(self) -> FouModel:
        return FouModel.from_lambdas(
            self.lambda_hat, self.sigma_hat, self.h_hat, self.multiplicities
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "h_hat": self.h_hat,
            "sigma_hat": self.sigma_hat,
            "lambda_hat": list(self.lambda_hat),
            "multiplicities": list(self.multiplicities),
            "contrast_value": self.contrast_value,
            "converged": self.converged,
            "n_evals": self.n_evals,
            "asymptotic_cov": None
            if self.asymptotic_cov is None
            else np.asarray(self.asymptotic_cov).tolist(),
            "horizon": self.horizon,
            "n": self.n,
            "hurst_estimated": self.hurst_estimated,
            "sigma_estimated": self.sigma_estimated,
            "loglik": self.loglik,
            "aic": self.aic,
            "diagnostics": list(self.diagnostics),
            "model": self.to_model().to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FitReport":
        from foukit.config.schemas import FitReportDocument

        return FitReportDocument.parse_document(data).to_report()

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def frequency_nodes(path: SamplePath, count: Optional[int] = None) -> np.ndarray:
    """x_i = iT/n for i = 1..count (default n)."""
    count = path.n if count is None else min(int(count), path.n)
    return np.arange(1, count + 1) * (path.horizon / path.n)


def periodogram_discrete(path: SamplePath, x: float) -> float:
    """
    I(x) = (T/2π) |(1/n) Σ_j e^{ijTx/n} X_j|².

    Args:
        path: Equispaced sample on [0, T]
        x: Frequency

    Returns:
        Nonnegative periodogram value
    """
    j = np.arange(1, path.n + 1)
    total = np.sum(path.values * np.exp(1j * j * (x * path.horizon / path.n))) / path.n
    return float(path.horizon / (2.0 * math.pi) * abs(total) ** 2)


def periodogram_grid(
    path: SamplePath, count: Optional[int] = None, method: str = "direct"
) -> np.ndarray:
    """
    Periodogram at the first `count` nodes iT/n.

    "direct" evaluates the sums in fixed blocks; "czt" uses the chirp-z
    transform on the arc e^{ikT²/n²}, which gives the same moduli.
    """
    nodes = frequency_nodes(path, count)
    n = path.n
    scale = path.horizon / (2.0 * math.pi)
    if method == "czt":
        beta = path.horizon**2 / n**2
        sums = signal.czt(path.values, m=nodes.size, w=np.exp(-1j * beta), a=np.exp(1j * beta))
        return scale * np.abs(sums / n) ** 2
    if method != "direct":
        raise DomainError(f"periodogram method must be one of {PERIODOGRAM_METHODS}")
    j = np.arange(1, n + 1)
    step = path.horizon / n
    out = np.empty(nodes.size)
    block = max(1, _BLOCK_ELEMENTS // n)
    for start in range(0, nodes.size, block):
        phases = np.outer(nodes[start : start + block] * step, j)
        sums = np.exp(1j * phases) @ path.values
        out[start : start + block] = scale * np.abs(sums / n) ** 2
    return out


def _check_weight(weight: WeightSpec, p: int) -> None:
    if not weight.admissible_for(p):
        raise DomainError(
            f"weight exponents (a={weight.exp_a:g}, b={weight.exp_b:g}) need "
            f"a >= 2p = {2 * p} and b >= a + 3 for the discretized contrast"
        )


class _Contrast:
    """
    The discretized contrast for fixed (σ, H, multiplicities) as a function of λ.

    The periodogram and the λ-free part of log f are computed once.
    """

    def __init__(
        self,
        path: SamplePath,
        multiplicities: Sequence[int],
        sigma: float,
        hurst: float,
        cfg: WhittleConfig,
        periodogram: Optional[np.ndarray] = None,
    ):
        self.multiplicities = np.asarray(multiplicities, dtype=int)
        p = int(self.multiplicities.sum())
        h = check_hurst(hurst)
        if not sigma > 0:
            raise DomainError(f"sigma must be positive, got {sigma}")
        weight = cfg.weight_for(p)
        _check_weight(weight, p)

        count = path.n if cfg.freq_nodes is None else min(cfg.freq_nodes, path.n)
        if count < path.n:
            logger.warning("Whittle contrast truncated to the first %d of %d frequencies", count, path.n)
        self.nodes = frequency_nodes(path, count)
        if periodogram is None:
            periodogram = periodogram_grid(path, count, cfg.periodogram_method)
        self.periodogram = np.asarray(periodogram, dtype=float)
        if self.periodogram.shape != self.nodes.shape:
            raise DomainError(
                f"periodogram has {self.periodogram.size} values for {self.nodes.size} nodes"
            )
        self.weights = weight(self.nodes)
        self.base_log = (
            2.0 * math.log(sigma)
            + special.gammaln(2.0 * h + 1.0)
            + math.log(math.sin(h * math.pi))
            - math.log(2.0 * math.pi)
            + (2 * p - 1 - 2.0 * h) * np.log(self.nodes)
        )
        self.x2 = self.nodes**2
        self.factor = path.horizon / path.n / (2.0 * math.pi)

    def __call__(self, lambdas: Sequence[float]) -> float:
        log_f = self.base_log.copy()
        for lam, mult in zip(lambdas, self.multiplicities):
            log_f -= mult * np.log(lam * lam + self.x2)
        terms = (log_f + self.periodogram * np.exp(-log_f)) * self.weights
        # fsum is exactly rounded, hence independent of summation order
        return self.factor * math.fsum(terms)


def whittle_contrast(
    path: SamplePath,
    model: FouModel,
    cfg: WhittleConfig = DEFAULT_WHITTLE,
    periodogram: Optional[np.ndarray] = None,
) -> float:
    """
    Evaluate the discretized Whittle contrast at the model's (λ, σ, H).

    Args:
        path: Equispaced sample on [0, T]
        model: Candidate model
        cfg: Weight and frequency settings
        periodogram: Precomputed periodogram at the nodes, if available

    Returns:
        The contrast value
    """
    contrast = _Contrast(path, model.multiplicities, model.sigma, model.hurst, cfg, periodogram)
    return contrast(model.lambdas)


class _Box:
    """Ordered box {lo_i ≤ λ_i ≤ hi_i, λ_{i+1} ≥ λ_i + gap} and its parametrization."""

    def __init__(self, bounds: Sequence[Tuple[float, float]], gap: float):
        self.bounds = list(bounds)
        self.gap = gap
        q = len(self.bounds)
        self.lower = np.empty(q)
        self.upper = np.empty(q)
        for i, (lo, _) in enumerate(self.bounds):
            self.lower[i] = lo if i == 0 else max(lo, self.lower[i - 1] + gap)
        for i in range(q - 1, -1, -1):
            hi = self.bounds[i][1]
            self.upper[i] = hi if i == q - 1 else min(hi, self.upper[i + 1] - gap)
        if np.any(self.lower > self.upper):
            raise DomainError(f"λ box {self.bounds} with gap {gap} is empty")

    def to_lambdas(self, g: np.ndarray) -> np.ndarray:
        """λ₁ = lo + g₀², λ_{i+1} = max(λ_i + gap, lo_{i+1}) + g_i²."""
        lam = np.empty(g.size)
        for i, gi in enumerate(g):
            floor = self.bounds[0][0] if i == 0 else max(lam[i - 1] + self.gap, self.bounds[i][0])
            lam[i] = floor + gi * gi
        return lam

    def from_lambdas(self, lam: np.ndarray) -> np.ndarray:
        g = np.empty(lam.size)
        for i, value in enumerate(lam):
            floor = self.bounds[0][0] if i == 0 else max(lam[i - 1] + self.gap, self.bounds[i][0])
            g[i] = math.sqrt(max(value - floor, 0.0))
        return g

    def project(self, lam: np.ndarray) -> np.ndarray:
        out = np.empty(lam.size)
        for i, value in enumerate(lam):
            low = self.lower[i] if i == 0 else max(self.lower[i], out[i - 1] + self.gap)
            out[i] = min(max(value, low), self.upper[i])
        return out

    def contains(self, lam: np.ndarray, slack: float = 1.0e-12) -> bool:
        if np.any(lam < self.lower - slack) or np.any(lam > self.upper + slack):
            return False
        return bool(np.all(np.diff(lam) >= self.gap - slack))

    def lattice(self, points: int) -> np.ndarray:
        """All feasible points of the per-axis grid with `points` values per axis."""
        axes = [np.linspace(lo, hi, points) for lo, hi in self.bounds]
        grid = np.array(list(product(*axes)))
        keep = np.array([self.contains(row) for row in grid])
        return grid[keep]

    def geometric_lattice(self, budget: int = _LATTICE_BUDGET) -> np.ndarray:
        """Feasible points of a per-axis geomspace grid, at most `budget` before filtering."""
        q = len(self.bounds)
        points = max(3, int(budget ** (1.0 / q)))
        axes = [np.geomspace(lo, hi, points) for lo, hi in self.bounds]
        grid = np.array(list(product(*axes)))
        keep = np.array([self.contains(row) for row in grid])
        return grid[keep]

    def starts(self, count: int, seed: int) -> np.ndarray:
        """Quasi-random feasible starting points."""
        q = len(self.bounds)
        sampler = qmc.Halton(d=q, scramble=True, seed=seed)
        unit = np.sort(sampler.random(count), axis=1)
        raw = self.lower + unit * (self.upper - self.lower)
        return np.array([self.project(row) for row in raw])


def _objective(contrast: _Contrast, box: _Box):
    def evaluate(g: np.ndarray) -> float:
        lam = box.to_lambdas(g)
        feasible = box.project(lam)
        excess = float(np.sum((lam - feasible) ** 2))
        return contrast(feasible) + _PENALTY * excess

    return evaluate


def _nelder_mead(evaluate, start_g: np.ndarray, cfg: WhittleConfig) -> optimize.OptimizeResult:
    return optimize.minimize(
        evaluate,
        start_g,
        method="Nelder-Mead",
        options={"maxiter": cfg.max_iter, "xatol": cfg.xatol, "fatol": cfg.fatol},
    )


def contrast_grid(
    path: SamplePath,
    structure: Sequence[int],
    sigma: float,
    hurst: float,
    cfg: WhittleConfig = DEFAULT_WHITTLE,
    points: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluate the contrast on the feasible lattice of the λ box.

    Returns:
        (lattice points of shape (m, q), contrast values of shape (m,))
    """
    structure = tuple(int(s) for s in structure)
    box = _Box(cfg.bounds(len(structure)), cfg.min_gap)
    contrast = _Contrast(path, structure, sigma, hurst, cfg)
    lattice = box.lattice(points or cfg.grid_points)
    values = np.array([contrast(row) for row in lattice])
    return lattice, values


def fit_lambda(
    path: SamplePath,
    structure: Sequence[int],
    sigma: float,
    hurst: float,
    cfg: WhittleConfig = DEFAULT_WHITTLE,
) -> FitReport:
    """
    Minimize the discretized contrast over the ordered λ box.

    Args:
        path: Equispaced sample on [0, T]
        structure: Multiplicities (p_1, …, p_q)
        sigma: Estimated or known σ
        hurst: Estimated or known H, inside (0, 1)
        cfg: Search settings

    Returns:
        FitReport with λ̂ inside the box and the gaps respected

    Raises:
        OptimizerError: If no start converges; carries the best incumbent
    """
    structure = tuple(int(s) for s in structure)
    if not structure or any(s < 1 for s in structure):
        raise DomainError(f"structure must list positive multiplicities, got {structure}")
    box = _Box(cfg.bounds(len(structure)), cfg.min_gap)
    contrast = _Contrast(path, structure, sigma, hurst, cfg)
    evaluate = _objective(contrast, box)

    if cfg.optimizer == "grid-refine":
        lattice = box.lattice(cfg.grid_points)
        values = [contrast(row) for row in lattice]
        starts = lattice[[int(np.argmin(values))]]
        grid_evals = len(values)
    else:
        starts = box.starts(cfg.multistart, cfg.start_seed)
        grid_evals = 0
        if cfg.lattice_start:
            lattice = box.geometric_lattice()
            if lattice.size:
                values = [contrast(row) for row in lattice]
                starts = np.vstack([starts, lattice[[int(np.argmin(values))]]])
                grid_evals = len(values)

    start_params = [box.from_lambdas(s) for s in starts]
    if cfg.threads > 1 and len(start_params) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(lambda g: _nelder_mead(evaluate, g, cfg), start_params))
    else:
        results = [_nelder_mead(evaluate, g, cfg) for g in start_params]

    n_evals = grid_evals + sum(int(r.nfev) for r in results)
    best_index = min(range(len(results)), key=lambda i: (results[i].fun, i))
    best = results[best_index]
    lambda_hat = box.project(box.to_lambdas(best.x))
    report = FitReport(
        h_hat=hurst,
        sigma_hat=sigma,
        lambda_hat=tuple(float(v) for v in lambda_hat),
        multiplicities=structure,
        contrast_value=contrast(lambda_hat),
        converged=bool(best.success),
        n_evals=n_evals,
        horizon=path.horizon,
        n=path.n,
    )
    if not any(r.success for r in results):
        raise OptimizerError(
            f"Nelder-Mead did not converge from any of {len(results)} starts", best=report
        )
    if not best.success:
        report.diagnostics.append("best start did not converge; another start did")
    logger.debug("λ fit %s: contrast %.6g after %d evaluations", report.lambda_hat, report.contrast_value, n_evals)
    return report


def _log_density_gradient(model: FouModel, x: np.ndarray) -> np.ndarray:
    """∂/∂λ_i log f(x) = −2p_iλ_i / (λ_i² + x²), one row per root."""
    return np.array([
        -2.0 * r.multiplicity * r.value / (r.value**2 + x**2) for r in model.roots
    ])


def asymptotic_lambda_cov(model: FouModel, weight: WeightSpec, T: float) -> np.ndarray:
    """
    Sandwich covariance W₁⁻¹W₂W₁⁻¹ / T of the continuous-time λ estimator.

    w⁽¹⁾_ij = (1/4π)∫ w ∂_i log f ∂_j log f dx and w⁽²⁾_ij the same with w².
    Applying it to the discretized estimator is an approximation.

    Args:
        model: Model at which the matrices are evaluated
        weight: Weight function, normally the continuous-time form
        T: Horizon

    Returns:
        q x q covariance matrix

    Raises:
        NumericalFailureError: If W₁ is singular or a quadrature fails
    """
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    if not weight.continuous_only:
        logger.warning(
            "Sandwich covariance with weight (a=%g, b=%g) is outside its derivation",
            weight.exp_a,
            weight.exp_b,
        )
    q = model.q
    w1 = np.empty((q, q))
    w2 = np.empty((q, q))
    for i in range(q):
        for j in range(i, q):
            def integrand(x: float, power: int) -> float:
                grad = _log_density_gradient(model, np.array([x]))[:, 0]
                return float(weight(x)) ** power * grad[i] * grad[j]

            for target, power in ((w1, 1), (w2, 2)):
                value, _, info, *message = integrate.quad(
                    integrand, 0.0, np.inf, args=(power,), limit=200, full_output=1
                )
                if message:
                    raise NumericalFailureError(f"W{power}[{i},{j}] quadrature failed: {message[0]}")
                # (1/4π)∫_{−∞}^{∞} of an even integrand
                target[i, j] = target[j, i] = value / (2.0 * math.pi)

    if np.linalg.cond(w1) > _SINGULAR_CONDITION:
        raise NumericalFailureError(
            f"W1 is singular for {model}: the λ configuration is not identifiable"
        )
    w1_inv = np.linalg.inv(w1)
    cov = w1_inv @ w2 @ w1_inv / T
    return 0.5 * (cov + cov.T)
