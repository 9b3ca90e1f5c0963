"""Monte Carlo engine: replicated simulate-then-fit runs over (T, n) cells."""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from foukit.errors import DomainError, FoukitError
from foukit.estimate.hurst import estimate_h, estimate_sigma
from foukit.estimate.pipeline import DEFAULT_FIT, FitOptions, center_path, fit_fou
from foukit.estimate.whittle import DEFAULT_WHITTLE, WhittleConfig
from foukit.model.fou_model import FouModel
from foukit.simcore.rng import make_generator
from foukit.simcore.sampler import SimConfig, simulate

logger = logging.getLogger(__name__)


def rate_window(hurst: float) -> Optional[Tuple[float, float]]:
    """
    Open interval of exponents α for which T_n = n^{1−α} keeps the
    discretized λ estimator consistent.

    Returns None when no window is known for this H (H = 1/2 or H >= 5/6).
    """
    if 0.5 < hurst < 5.0 / 6.0:
        return 0.75, min(1.0 / (2.0 * (2.0 * hurst - 1.0)), 1.0)
    if 0.0 < hurst < 0.5:
        return max(1.0 / (hurst + 1.0), 0.75), 1.0
    return None


def check_rate_exponent(alpha: float, hurst: float) -> bool:
    """True if alpha lies in the window for hurst; logs a warning otherwise."""
    window = rate_window(hurst)
    if window is None:
        logger.warning("No admissible rate window is known for H = %.4f", hurst)
        return False
    lo, hi = window
    if not lo < alpha < hi:
        logger.warning(
            "Rate exponent α = %.4f is outside (%.4f, %.4f) for H = %.4f", alpha, lo, hi, hurst
        )
        return False
    return True


def scheduled_horizon(n: int, alpha: float) -> float:
    """T_n = n^{1−α}."""
    return float(n) ** (1.0 - alpha)


@dataclass(frozen=True)
class StudyCell:
    index: int
    horizon: float
    n: int


@dataclass
class ReplicateResult:
    """Estimates from one simulated path, or the error that stopped it."""

    cell: int
    replicate: int
    h_hat: float = math.nan
    sigma_hat: float = math.nan
    lambda_hat: Tuple[float, ...] = ()
    converged: bool = False
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


CellHook = Callable[[StudyCell], None]
FailureHook = Callable[[StudyCell, ReplicateResult], None]
RowHook = Callable[[StudyCell, Dict[str, Any]], None]


@dataclass
class StudyHooks:
    """
    Observers of a running study.

    on_cell_start runs before a cell's replicates, on_replicate_failure once
    per replicate that recorded an error, on_cell_finish with the summary row.
    """

    on_cell_start: List[CellHook] = field(default_factory=list)
    on_replicate_failure: List[FailureHook] = field(default_factory=list)
    on_cell_finish: List[RowHook] = field(default_factory=list)

    def cell_started(self, cell: StudyCell) -> None:
        for hook in self.on_cell_start:
            hook(cell)

    def replicates_done(self, cell: StudyCell, results: Sequence[ReplicateResult]) -> None:
        for result in results:
            if not result.ok:
                for hook in self.on_replicate_failure:
                    hook(cell, result)

    def cell_finished(self, cell: StudyCell, row: Dict[str, Any]) -> None:
        for hook in self.on_cell_finish:
            hook(cell, row)


@dataclass
class MonteCarloStudy:
    """
    Replicated estimation study of one FOU model.

    Every (T, n) pair is a cell; each cell runs `replications` independent
    replicates whose random stream is make_generator(master_seed, cell, rep),
    so results do not depend on thread scheduling. With rate_exponent set,
    the horizons are T_n = n^{1−α} instead of the product of T_values and n_values.
    """

    model: FouModel
    T_values: Sequence[float] = (50.0,)
    n_values: Sequence[int] = (5000,)
    replications: int = 20
    master_seed: int = 0
    whittle: WhittleConfig = DEFAULT_WHITTLE
    options: FitOptions = DEFAULT_FIT
    sim: SimConfig = field(default_factory=SimConfig)
    rate_exponent: Optional[float] = None
    estimate_lambda: bool = True
    threads: int = 1
    update_interval: float = 1.0
    hooks: StudyHooks = field(default_factory=StudyHooks)

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError(f"replications must be >= 1, got {self.replications}")
        if not self.n_values or any(int(n) < 2 for n in self.n_values):
            raise DomainError("n_values must be a nonempty list of integers >= 2")
        if self.rate_exponent is None:
            if not self.T_values or any(not t > 0 for t in self.T_values):
                raise DomainError("T_values must be a nonempty list of positive reals")
        else:
            if not 0 < self.rate_exponent < 1:
                raise DomainError(f"rate exponent must lie in (0, 1), got {self.rate_exponent}")
            check_rate_exponent(self.rate_exponent, self.model.hurst)
        if self.replications == 1:
            logger.warning("A study with m = 1 reports no standard deviations")

        self.cells: List[StudyCell] = self._build_cells()
        self.results: List[ReplicateResult] = []
        self.rows: List[Dict[str, Any]] = []
        self.current_cell = 0
        self.running = True

    def _build_cells(self) -> List[StudyCell]:
        if self.rate_exponent is not None:
            pairs = [(scheduled_horizon(int(n), self.rate_exponent), int(n)) for n in self.n_values]
        else:
            pairs = [(float(t), int(n)) for t in self.T_values for n in self.n_values]
        return [StudyCell(i, t, n) for i, (t, n) in enumerate(pairs)]

    def run_replicate(self, cell: StudyCell, replicate: int) -> ReplicateResult:
        """Simulate and fit one replicate of a cell."""
        result = ReplicateResult(cell.index, replicate)
        rng = make_generator(self.master_seed, cell.index, replicate)
        try:
            path = simulate(self.model, cell.n, cell.horizon, self.sim, rng)
            if self.estimate_lambda:
                report = fit_fou(path, self.model.multiplicities, self.whittle, self.options)
                result.h_hat = report.h_hat
                result.sigma_hat = report.sigma_hat
                result.lambda_hat = report.lambda_hat
                result.converged = report.converged
            else:
                centred = center_path(path) if self.options.center else path
                result.h_hat = estimate_h(centred, self.options.filt)
                result.sigma_hat = estimate_sigma(centred, self.options.filt, result.h_hat)
                result.converged = True
        except FoukitError as err:
            result.error = f"{type(err).__name__}: {err}"
            logger.debug("Cell %d replicate %d failed: %s", cell.index, replicate, err)
        return result

    def _run_cell(self, cell: StudyCell) -> List[ReplicateResult]:
        replicates = range(self.replications)
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                return list(pool.map(lambda r: self.run_replicate(cell, r), replicates))
        return [self.run_replicate(cell, r) for r in replicates]

    def step(self) -> Optional[Dict[str, Any]]:
        """Run the next cell and return its summary row."""
        if not self.running:
            return None
        cell = self.cells[self.current_cell]
        self.hooks.cell_started(cell)
        results = self._run_cell(cell)
        self.hooks.replicates_done(cell, results)
        self.results.extend(results)

        row = summarize_cell(cell, results, self.model.q)
        self.rows.append(row)
        self.hooks.cell_finished(cell, row)

        self.current_cell += 1
        if self.current_cell >= len(self.cells):
            self.running = False
        return row

    def run(self, verbose: bool = True) -> pd.DataFrame:
        """
        Run every remaining cell.

        Args:
            verbose: Log a progress line at most once per update_interval seconds

        Returns:
            The results table, one row per cell
        """
        logger.info(
            "Monte Carlo study of %s: %d cells x %d replicates",
            self.model,
            len(self.cells),
            self.replications,
        )
        last_update = time.time()
        while self.running:
            row = self.step()
            if verbose and (time.time() - last_update) >= self.update_interval:
                logger.info(
                    "Cell %d/%d | T=%g n=%d | H %s",
                    self.current_cell,
                    len(self.cells),
                    row["T"],
                    row["n"],
                    row["H"],
                )
                last_update = time.time()
        return self.results_table()

    def results_table(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)


def _mean_sd(values: np.ndarray) -> Tuple[float, float]:
    values = values[np.isfinite(values)]
    if values.size == 0:
        return math.nan, math.nan
    sd = float(np.std(values, ddof=1)) if values.size > 1 else math.nan
    return float(np.mean(values)), sd


def _formatted(mean: float, sd: float) -> str:
    if math.isnan(mean):
        return "n/a"
    if math.isnan(sd):
        return f"{mean:.4f}"
    return f"{mean:.4f} ({sd:.3f})"


def summarize_cell(cell: StudyCell, results: Sequence[ReplicateResult], q: int) -> Dict[str, Any]:
    """
    Mean and standard deviation of each estimator over a cell's replicates.

    Numeric columns hold mean/sd; the columns "H", "sigma" and "lambda_i"
    hold the "mean (sd)" text used in summary tables.
    """
    ok = [r for r in results if r.ok]
    row: Dict[str, Any] = {"T": cell.horizon, "n": cell.n, "m": len(results), "failures": len(results) - len(ok)}
    columns = [("h", "H", [r.h_hat for r in ok]), ("sigma", "sigma", [r.sigma_hat for r in ok])]
    for i in range(q):
        values = [r.lambda_hat[i] if len(r.lambda_hat) > i else math.nan for r in ok]
        columns.append((f"lambda{i + 1}", f"lambda_{i + 1}", values))
    for key, label, values in columns:
        mean, sd = _mean_sd(np.asarray(values, dtype=float))
        row[f"{key}_mean"] = mean
        row[f"{key}_sd"] = sd
        row[label] = _formatted(mean, sd)
    row["converged"] = sum(r.converged for r in ok)
    return row
