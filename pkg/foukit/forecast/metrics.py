"""Quality-of-prediction measures for one-step forecasts."""

import math
from dataclasses import dataclass
from typing import Dict

import numpy as np
import pandas as pd

from foukit.errors import DomainError

MEASURES = ("rmse", "mae", "w1", "w2")


@dataclass(frozen=True)
class PredictionRun:
    """
    The last m observations of a series and their one-step predictions.

    X̄(m), used by the Willmott indices, is the mean of the observed values.
    """

    observed: np.ndarray
    predicted: np.ndarray

    def __post_init__(self):
        observed = np.asarray(self.observed, dtype=float).ravel()
        predicted = np.asarray(self.predicted, dtype=float).ravel()
        if observed.shape != predicted.shape:
            raise DomainError(
                f"observed has {observed.size} values, predicted has {predicted.size}"
            )
        if observed.size < 2:
            raise DomainError(f"a prediction run needs m >= 2, got {observed.size}")
        if not (np.all(np.isfinite(observed)) and np.all(np.isfinite(predicted))):
            raise DomainError("prediction run contains non-finite values")
        observed.setflags(write=False)
        predicted.setflags(write=False)
        object.__setattr__(self, "observed", observed)
        object.__setattr__(self, "predicted", predicted)

    @property
    def m(self) -> int:
        return int(self.observed.size)

    @property
    def errors(self) -> np.ndarray:
        return self.observed - self.predicted

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"observed": self.observed, "predicted": self.predicted, "error": self.errors}
        )


def rmse(run: PredictionRun) -> float:
    return math.sqrt(float(np.mean(run.errors**2)))


def mae(run: PredictionRun) -> float:
    return float(np.mean(np.abs(run.errors)))


def _agreement_terms(run: PredictionRun) -> np.ndarray:
    center = float(np.mean(run.observed))
    return np.abs(run.predicted - center) + np.abs(run.observed - center)


def willmott_w2(run: PredictionRun) -> float:
    """
    W₂ = 1 − Σ(X − X̂)² / Σ(|X̂ − X̄(m)| + |X − X̄(m)|)².

    A run whose denominator vanishes is a perfect prediction of a constant
    and scores 1.
    """
    numerator = float(np.sum(run.errors**2))
    denominator = float(np.sum(_agreement_terms(run) ** 2))
    if denominator == 0.0:
        return 1.0
    return 1.0 - numerator / denominator


def willmott_w1(run: PredictionRun) -> float:
    """W₁ = 1 − Σ|X − X̂| / Σ(|X̂ − X̄(m)| + |X − X̄(m)|)."""
    numerator = float(np.sum(np.abs(run.errors)))
    denominator = float(np.sum(_agreement_terms(run)))
    if denominator == 0.0:
        return 1.0
    return 1.0 - numerator / denominator


def all_measures(run: PredictionRun) -> Dict[str, float]:
    """The four measures keyed by name."""
    return {
        "rmse": rmse(run),
        "mae": mae(run),
        "w1": willmott_w1(run),
        "w2": willmott_w2(run),
    }
