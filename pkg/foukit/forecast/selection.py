"""Choice of the horizon T for a series of fixed length by prediction quality."""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from foukit.errors import DomainError, FoukitError, NumericalFailureError
from foukit.estimate.pipeline import DEFAULT_FIT, FitOptions, fit_fou
from foukit.estimate.whittle import DEFAULT_WHITTLE, FitReport, WhittleConfig
from foukit.forecast.metrics import MEASURES, all_measures
from foukit.forecast.predictor import prediction_run
from foukit.simcore.sampler import SamplePath

logger = logging.getLogger(__name__)

# Measures where larger is better
_MAXIMIZED = {"w1", "w2"}
FIT_TARGETS = ("full", "training")


@dataclass(frozen=True)
class TSelectionConfig:
    """
    Grid of horizons and the measure that ranks them.

    fit_on="full" fits each T on the whole series and scores the last
    m_holdout one-step predictions; "training" fits on the series without them.
    """

    t_grid: Tuple[float, ...]
    criterion: str = "rmse"
    m_holdout: int = 50
    fit_on: str = "full"
    threads: int = 1

    def __post_init__(self):
        grid = tuple(float(t) for t in self.t_grid)
        if not grid:
            raise DomainError("t_grid must not be empty")
        if any(not t > 0 for t in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError(f"t_grid must be positive and strictly ascending, got {grid}")
        object.__setattr__(self, "t_grid", grid)
        if self.criterion not in MEASURES:
            raise DomainError(f"criterion must be one of {MEASURES}, got {self.criterion!r}")
        if self.m_holdout < 2:
            raise DomainError(f"m_holdout must be >= 2, got {self.m_holdout}")
        if self.fit_on not in FIT_TARGETS:
            raise DomainError(f"fit_on must be one of {FIT_TARGETS}, got {self.fit_on!r}")
        if self.threads < 1:
            raise DomainError("threads must be positive")


@dataclass
class CriterionRow:
    """Measures obtained with one horizon T."""

    horizon: float
    rmse: float = math.nan
    mae: float = math.nan
    w1: float = math.nan
    w2: float = math.nan
    rank: int = 0
    error: Optional[str] = None
    report: Optional[FitReport] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.error is None

    def score(self, criterion: str) -> float:
        return getattr(self, criterion)

    def get_sort_key(self, criterion: str) -> tuple:
        """
        Sorting key: successful rows first, best score next, smaller T on ties.
        """
        if not self.ok:
            return (1, 0.0, self.horizon)
        value = self.score(criterion)
        return (0, -value if criterion in _MAXIMIZED else value, self.horizon)


class CriterionTable:
    """Per-T measures ranked by one criterion."""

    def __init__(self, criterion: str = "rmse"):
        if criterion not in MEASURES:
            raise DomainError(f"criterion must be one of {MEASURES}, got {criterion!r}")
        self.criterion = criterion
        self.rows: Dict[float, CriterionRow] = {}
        self._sorted_rows: List[CriterionRow] = []

    def add_row(self, row: CriterionRow):
        self.rows[row.horizon] = row
        self._update_rankings()

    def _update_rankings(self):
        self._sorted_rows = sorted(self.rows.values(), key=lambda r: r.get_sort_key(self.criterion))
        for idx, row in enumerate(self._sorted_rows, start=1):
            row.rank = idx

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def best(self) -> CriterionRow:
        """
        Best successful row.

        Raises:
            NumericalFailureError: If no horizon produced a fit
        """
        if not self._sorted_rows or not self._sorted_rows[0].ok:
            errors = "; ".join(f"T={r.horizon:g}: {r.error}" for r in self._sorted_rows)
            raise NumericalFailureError(f"no horizon in the grid could be fitted ({errors})")
        return self._sorted_rows[0]

    def get_rankings(self) -> List[Dict[str, Any]]:
        return [
            {
                "rank": r.rank,
                "T": r.horizon,
                "rmse": r.rmse,
                "mae": r.mae,
                "w1": r.w1,
                "w2": r.w2,
                "error": r.error,
            }
            for r in self._sorted_rows
        ]

    def to_frame(self) -> pd.DataFrame:
        """Rows in grid order with columns T, rmse, mae, w1, w2, rank, error."""
        ordered = [self.rows[t] for t in sorted(self.rows)]
        return pd.DataFrame(
            {
                "T": [r.horizon for r in ordered],
                "rmse": [r.rmse for r in ordered],
                "mae": [r.mae for r in ordered],
                "w1": [r.w1 for r in ordered],
                "w2": [r.w2 for r in ordered],
                "rank": [r.rank for r in ordered],
                "error": [r.error or "" for r in ordered],
            }
        )

    def to_json(self, indent: Optional[int] = 2) -> str:
        rows = [
            {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()}
            for row in self.get_rankings()
        ]
        return json.dumps({"criterion": self.criterion, "rows": rows}, indent=indent)

    def format_table(self, top_n: Optional[int] = None) -> str:
        """Plain-text ranking, best first."""
        rankings = self.get_rankings()
        if top_n:
            rankings = rankings[:top_n]
        lines = [
            "=" * 64,
            f"Horizon ranking by {self.criterion.upper()}".center(64),
            "=" * 64,
            f"{'Rank':<6} {'T':<10} {'RMSE':<11} {'MAE':<11} {'W1':<11} {'W2':<11}",
            "-" * 64,
        ]
        for r in rankings:
            if r["error"]:
                lines.append(f"{r['rank']:<6} {r['T']:<10g} failed: {r['error']}")
                continue
            lines.append(
                f"{r['rank']:<6} {r['T']:<10g} {r['rmse']:<11.5f} {r['mae']:<11.5f} "
                f"{r['w1']:<11.5f} {r['w2']:<11.5f}"
            )
        lines.append("=" * 64)
        return "\n".join(lines)


def evaluate_horizon(
    values: np.ndarray,
    horizon: float,
    structure: Sequence[int],
    cfg: TSelectionConfig,
    whittle: WhittleConfig = DEFAULT_WHITTLE,
    options: FitOptions = DEFAULT_FIT,
) -> CriterionRow:
    """Fit the series placed on [0, horizon] and score its one-step predictions."""
    row = CriterionRow(horizon)
    try:
        path = SamplePath(values, horizon)
        fit_path = path if cfg.fit_on == "full" else path.head(path.n - cfg.m_holdout)
        report = fit_fou(fit_path, structure, whittle, options)
        run = prediction_run(report.to_model(), path, cfg.m_holdout)
        for name, value in all_measures(run).items():
            setattr(row, name, value)
        row.report = report
    except FoukitError as err:
        row.error = f"{type(err).__name__}: {err}"
        logger.info("T=%g failed: %s", horizon, err)
    return row


def select_t(
    values: Sequence[float],
    structure: Sequence[int],
    cfg: TSelectionConfig,
    whittle: WhittleConfig = DEFAULT_WHITTLE,
    options: FitOptions = DEFAULT_FIT,
) -> Tuple[float, CriterionTable]:
    """
    Rank every T of the grid by the configured prediction measure.

    Args:
        values: Raw series X_1..X_n
        structure: Multiplicities of the model to fit
        cfg: Grid, criterion and holdout size
        whittle: λ search settings
        options: Fixed or estimated H and σ, filter

    Returns:
        (best T, table with one row per grid point); ties go to the smaller T

    Raises:
        NumericalFailureError: If every T fails
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size <= cfg.m_holdout + 1:
        raise DomainError(
            f"series of {values.size} values is too short for {cfg.m_holdout} predictions"
        )

    def evaluate(horizon: float) -> CriterionRow:
        return evaluate_horizon(values, horizon, structure, cfg, whittle, options)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(evaluate, cfg.t_grid))
    else:
        rows = [evaluate(t) for t in cfg.t_grid]

    table = CriterionTable(cfg.criterion)
    for row in rows:
        table.add_row(row)
    best = table.best
    logger.info("Best T by %s: %g (%.6g)", cfg.criterion, best.horizon, best.score(cfg.criterion))
    return best.horizon, table
