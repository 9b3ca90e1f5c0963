"""One-step prediction, its quality measures and the choice of T."""

from foukit.forecast.metrics import (
    MEASURES,
    PredictionRun,
    all_measures,
    mae,
    rmse,
    willmott_w1,
    willmott_w2,
)
from foukit.forecast.predictor import (
    durbin_levinson,
    empirical_acvf,
    gaussian_loglik_aic,
    gaussian_loglik_from_acvf,
    predict_from_acvf,
    predict_one_step,
    prediction_run,
)
from foukit.forecast.selection import CriterionRow, CriterionTable, TSelectionConfig, select_t

__all__ = [
    "MEASURES",
    "CriterionRow",
    "CriterionTable",
    "PredictionRun",
    "TSelectionConfig",
    "all_measures",
    "durbin_levinson",
    "empirical_acvf",
    "gaussian_loglik_aic",
    "gaussian_loglik_from_acvf",
    "mae",
    "predict_from_acvf",
    "predict_one_step",
    "prediction_run",
    "rmse",
    "select_t",
    "willmott_w1",
    "willmott_w2",
]
