"""
One-step Gaussian prediction and exact Gaussian likelihood.

Both run the Durbin-Levinson recursion on the model autocovariances at the
sampling spacing Δ; the recursion yields the one-step predictions X̂_k and
their error variances v_k together.
"""

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from foukit.errors import DomainError, NumericalFailureError
from foukit.forecast.metrics import PredictionRun
from foukit.model.covariance import acvf_sequence
from foukit.model.fou_model import FouModel
from foukit.simcore.sampler import SamplePath

logger = logging.getLogger(__name__)

Fitter = Callable[[SamplePath], FouModel]


def durbin_levinson(gamma: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    One-step predictions and prediction-error variances of a stationary series.

    Args:
        gamma: Autocovariances γ(0), γ(Δ), …, at least len(values) of them
        values: Centred observations X_1..X_n

    Returns:
        (predictions, variances); predictions[k] uses values[:k] only

    Raises:
        NumericalFailureError: If the autocovariance sequence is not
            positive definite
    """
    gamma = np.asarray(gamma, dtype=float)
    values = np.asarray(values, dtype=float)
    n = values.size
    if gamma.size < n:
        raise DomainError(f"need {n} autocovariances, got {gamma.size}")
    if not gamma[0] > 0:
        raise NumericalFailureError(f"γ(0) = {gamma[0]:.3e} is not a positive variance")

    predictions = np.zeros(n)
    variances = np.empty(n)
    variances[0] = gamma[0]
    phi = np.empty(0)
    for k in range(1, n):
        if k == 1:
            reflection = gamma[1] / gamma[0]
            phi = np.array([reflection])
        else:
            reflection = (gamma[k] - phi @ gamma[k - 1 : 0 : -1]) / variances[k - 1]
            phi = np.append(phi - reflection * phi[::-1], reflection)
        variances[k] = variances[k - 1] * (1.0 - reflection**2)
        if not variances[k] > 0:
            raise NumericalFailureError(
                f"autocovariances are not positive definite at lag {k} "
                f"(partial autocorrelation {reflection:.6f})"
            )
        predictions[k] = phi @ values[k - 1 :: -1]
    return predictions, variances


def predict_from_acvf(gamma: np.ndarray, values: np.ndarray, m: int) -> np.ndarray:
    """
    Predict each of the last m values from all values before it.

    The series is centred with the mean of the values before the first
    target, and predictions are returned on the original scale.
    """
    values = np.asarray(values, dtype=float)
    first = _first_target(values.size, m)
    offset = float(np.mean(values[:first]))
    predictions, _ = durbin_levinson(gamma, values - offset)
    return predictions[first:] + offset


def _first_target(n: int, m: int) -> int:
    if not 1 <= m < n:
        raise DomainError(f"need 1 <= m < n for one-step prediction, got m={m}, n={n}")
    return n - m


def predict_one_step(
    model: FouModel,
    history: SamplePath,
    horizon_count: int,
    fitter: Optional[Fitter] = None,
) -> np.ndarray:
    """
    One-step predictions of the last horizon_count values of a series.

    Each target is predicted by its Gaussian conditional mean given every
    earlier observation. Parameters stay fixed unless a fitter is given; the
    fitter is then called on the observations before each target and its
    model is used for that target alone.

    Args:
        model: Fitted model (used for every target when fitter is None)
        history: The whole series, targets included, on [0, T]
        horizon_count: Number m of targets at the end of the series
        fitter: Optional refit callback, SamplePath -> FouModel

    Returns:
        Array of m predictions on the scale of the series
    """
    n = history.n
    first = _first_target(n, horizon_count)
    if fitter is None:
        gamma = acvf_sequence(model, n, history.delta)
        return predict_from_acvf(gamma, history.values, horizon_count)

    if first < 2:
        raise DomainError("refitting needs at least 2 observations before the first target")
    out = np.empty(horizon_count)
    for i, k in enumerate(range(first, n)):
        past = history.head(k)
        refitted = fitter(past)
        gamma = acvf_sequence(refitted, k + 1, history.delta)
        offset = float(np.mean(past.values))
        padded = np.append(past.values - offset, 0.0)
        predictions, _ = durbin_levinson(gamma, padded)
        out[i] = predictions[k] + offset
        logger.debug("Refit before target %d: %s", k, refitted)
    return out


def prediction_run(
    model: FouModel, history: SamplePath, m: int, fitter: Optional[Fitter] = None
) -> PredictionRun:
    """Predictions of the last m values paired with the observations."""
    predicted = predict_one_step(model, history, m, fitter)
    return PredictionRun(history.values[-m:], predicted)


def gaussian_loglik_from_acvf(gamma: np.ndarray, values: np.ndarray) -> float:
    """
    Exact Gaussian log-likelihood of centred values.

    ℓ = −½ Σ_k (log(2π v_k) + (X_k − X̂_k)² / v_k)
    """
    values = np.asarray(values, dtype=float)
    predictions, variances = durbin_levinson(gamma, values)
    innovations = values - predictions
    return float(-0.5 * np.sum(np.log(2.0 * math.pi * variances) + innovations**2 / variances))


def aic_parameter_count(model: FouModel, hurst_estimated: bool = True, sigma_estimated: bool = True) -> int:
    """k = number of distinct λ, plus one for each of H and σ when estimated."""
    return model.q + int(hurst_estimated) + int(sigma_estimated)


def gaussian_loglik_aic(
    model: FouModel,
    path: SamplePath,
    hurst_estimated: bool = True,
    sigma_estimated: bool = True,
    center: bool = True,
) -> Tuple[float, float]:
    """
    Exact Gaussian log-likelihood of a path under a model, and its AIC.

    Args:
        model: FOU model
        path: Equispaced sample; its spacing sets the autocovariance lags
        hurst_estimated: Count H as a fitted parameter
        sigma_estimated: Count σ as a fitted parameter
        center: Remove the sample mean first

    Returns:
        (loglik, aic) with aic = 2k − 2·loglik
    """
    values = path.values - float(np.mean(path.values)) if center else path.values
    gamma = acvf_sequence(model, path.n, path.delta)
    loglik = gaussian_loglik_from_acvf(gamma, values)
    k = aic_parameter_count(model, hurst_estimated, sigma_estimated)
    return loglik, 2.0 * k - 2.0 * loglik


def empirical_acvf(values: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample autocovariances (1/n) Σ (X_t − X̄)(X_{t+k} − X̄) for k = 0..max_lag."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if not 0 <= max_lag < n:
        raise DomainError(f"max_lag must lie in [0, {n - 1}], got {max_lag}")
    centred = values - values.mean()
    full = np.correlate(centred, centred, mode="full")[n - 1 : n + max_lag]
    return full / n
