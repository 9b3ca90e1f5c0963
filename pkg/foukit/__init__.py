"""
foukit - Fractional Iterated Ornstein-Uhlenbeck Processes

Closed-form autocovariances, simulation, filter and Whittle estimation,
and one-step forecasting for FOU(p) models.
"""

__version__ = "0.1.0"

from foukit.errors import (
    DataError,
    DomainError,
    FoukitError,
    NumericalFailureError,
    OptimizerError,
)
from foukit.model import FouModel, FouRoot, acvf, acvf_grid, spectral_density
from foukit.simcore import SamplePath, SimConfig, simulate
from foukit.estimate import FitOptions, FitReport, WhittleConfig, estimate_h_sigma, fit_fou, fit_lambda
from foukit.forecast import PredictionRun, TSelectionConfig, all_measures, prediction_run, select_t
from foukit.io import load_fixture, resolve_series

__all__ = [
    "DataError",
    "DomainError",
    "FitOptions",
    "FitReport",
    "FouModel",
    "FouRoot",
    "FoukitError",
    "NumericalFailureError",
    "OptimizerError",
    "PredictionRun",
    "SamplePath",
    "SimConfig",
    "TSelectionConfig",
    "WhittleConfig",
    "acvf",
    "acvf_grid",
    "all_measures",
    "estimate_h_sigma",
    "fit_fou",
    "fit_lambda",
    "load_fixture",
    "prediction_run",
    "resolve_series",
    "select_t",
    "simulate",
    "spectral_density",
]
