import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import linalg, stats

from foukit.errors import DomainError, NumericalFailureError
from foukit.estimate import FitOptions
from foukit.forecast import (
    CriterionRow,
    CriterionTable,
    PredictionRun,
    TSelectionConfig,
    all_measures,
    durbin_levinson,
    empirical_acvf,
    gaussian_loglik_aic,
    gaussian_loglik_from_acvf,
    mae,
    predict_from_acvf,
    predict_one_step,
    prediction_run,
    rmse,
    select_t,
    willmott_w1,
    willmott_w2,
)
from foukit.model import FouModel, acvf_sequence
from foukit.simcore import SamplePath, make_generator, sample_fou_exact

OU = FouModel.from_lambdas([0.8], sigma=1.0, hurst=0.5)


class TestMeasures:
    def test_hand_example(self):
        run = PredictionRun([1.0, 2.0], [0.0, 0.0])
        assert rmse(run) == pytest.approx(math.sqrt(2.5))
        assert mae(run) == pytest.approx(1.5)

    def test_reversed_predictions(self):
        run = PredictionRun([1.0, 2.0, 3.0], [3.0, 2.0, 1.0])
        assert willmott_w2(run) == pytest.approx(0.0, abs=1e-15)
        assert willmott_w1(run) == pytest.approx(0.0, abs=1e-15)

    def test_perfect_predictions(self):
        run = PredictionRun([0.3, -1.0, 2.5], [0.3, -1.0, 2.5])
        measures = all_measures(run)
        assert measures == {"rmse": 0.0, "mae": 0.0, "w1": 1.0, "w2": 1.0}

    def test_constant_series(self):
        run = PredictionRun([2.0, 2.0], [2.0, 2.0])
        assert willmott_w1(run) == 1.0
        assert willmott_w2(run) == 1.0

    def test_indices_bounded(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            run = PredictionRun(rng.standard_normal(10), rng.standard_normal(10))
            assert 0.0 <= willmott_w2(run) <= 1.0
            assert 0.0 <= willmott_w1(run) <= 1.0

    @pytest.mark.parametrize(
        "observed, predicted",
        [([1.0, 2.0], [1.0]), ([1.0], [1.0]), ([1.0, math.nan], [1.0, 2.0])],
    )
    def test_invalid_runs(self, observed, predicted):
        with pytest.raises(DomainError):
            PredictionRun(observed, predicted)

    def test_frame(self):
        frame = PredictionRun([1.0, 2.0], [0.5, 2.5]).to_frame()
        assert list(frame.columns) == ["observed", "predicted", "error"]
        assert_allclose(frame["error"], [0.5, -0.5])


class TestDurbinLevinson:
    def test_white_noise(self):
        values = np.random.default_rng(1).standard_normal(20)
        gamma = np.zeros(20)
        gamma[0] = 2.0
        predictions, variances = durbin_levinson(gamma, values)
        assert_allclose(predictions, 0.0)
        assert_allclose(variances, 2.0)

    def test_autoregressive_sequence(self):
        phi = 0.6
        gamma = phi ** np.arange(30)
        values = np.random.default_rng(2).standard_normal(30)
        predictions, variances = durbin_levinson(gamma, values)
        assert_allclose(predictions[1:], phi * values[:-1], rtol=1e-10, atol=1e-12)
        assert_allclose(variances[1:], 1.0 - phi**2, rtol=1e-10)

    def test_not_positive_definite(self):
        with pytest.raises(NumericalFailureError):
            durbin_levinson(np.array([1.0, 1.0, 1.0]), np.ones(3))
        with pytest.raises(NumericalFailureError):
            durbin_levinson(np.array([0.0, 0.0]), np.ones(2))

    def test_too_few_autocovariances(self):
        with pytest.raises(DomainError):
            durbin_levinson(np.ones(2), np.ones(3))

    def test_matches_conditional_mean(self):
        model = FouModel.repeated(0.8, 2, hurst=0.7)
        gamma = acvf_sequence(model, 12, 0.5)
        values = np.random.default_rng(3).standard_normal(12)
        predictions, _ = durbin_levinson(gamma, values)
        cov = linalg.toeplitz(gamma[:11])
        expected = gamma[1:12][::-1] @ np.linalg.solve(cov, values[:11])
        assert_allclose(predictions[11], expected, rtol=1e-8)


class TestPrediction:
    def test_ornstein_uhlenbeck_is_autoregressive(self):
        path = SamplePath(np.random.default_rng(4).standard_normal(40), 20.0)
        predicted = predict_one_step(OU, path, 5)
        offset = path.values[:35].mean()
        expected = offset + math.exp(-0.8 * path.delta) * (path.values[34:39] - offset)
        assert_allclose(predicted, expected, rtol=1e-8)

    def test_prediction_run(self):
        path = sample_fou_exact(OU, 60, 30.0, seed=6)
        run = prediction_run(OU, path, 10)
        assert run.m == 10
        assert_allclose(run.observed, path.values[-10:])

    def test_refit_calls_fitter_on_each_past(self):
        path = sample_fou_exact(OU, 30, 15.0, seed=7)
        seen = []

        def fitter(past):
            seen.append(past.n)
            return OU

        refit = predict_one_step(OU, path, 4, fitter=fitter)
        fixed = predict_one_step(OU, path, 4)
        assert seen == [26, 27, 28, 29]
        assert refit.shape == (4,)
        assert refit[0] == pytest.approx(fixed[0], rel=1e-10)

    @pytest.mark.parametrize("m", [0, 10])
    def test_invalid_target_count(self, m):
        path = SamplePath(np.arange(10.0), 5.0)
        with pytest.raises(DomainError):
            predict_one_step(OU, path, m)

    def test_predict_from_acvf_restores_offset(self):
        values = np.array([10.0, 11.0, 9.0, 10.5])
        gamma = np.array([1.0, 0.0, 0.0, 0.0])
        assert_allclose(predict_from_acvf(gamma, values, 2), [10.5, 10.5])


class TestLikelihood:
    def test_independent_pair(self):
        assert gaussian_loglik_from_acvf(np.array([1.0, 0.0]), np.zeros(2)) == pytest.approx(
            -math.log(2.0 * math.pi)
        )

    def test_matches_dense_density(self):
        model = FouModel.from_lambdas([0.3, 0.8], hurst=0.65)
        gamma = acvf_sequence(model, 40, 0.25)
        values = np.random.default_rng(8).standard_normal(40)
        expected = stats.multivariate_normal(np.zeros(40), linalg.toeplitz(gamma)).logpdf(values)
        assert abs(gaussian_loglik_from_acvf(gamma, values) - expected) < 1e-8

    def test_aic_counts_parameters(self):
        model = FouModel.from_lambdas([0.3, 0.8], hurst=0.65)
        path = sample_fou_exact(model, 50, 10.0, seed=9)
        loglik, aic = gaussian_loglik_aic(model, path)
        assert aic == pytest.approx(2.0 * 4 - 2.0 * loglik)
        _, fixed_aic = gaussian_loglik_aic(model, path, hurst_estimated=False, sigma_estimated=False)
        assert fixed_aic == pytest.approx(2.0 * 2 - 2.0 * loglik)

    def test_empirical_acvf(self):
        values = np.array([1.0, 3.0, 2.0, 6.0])
        centred = values - 3.0
        assert_allclose(
            empirical_acvf(values, 2),
            [centred @ centred / 4, centred[:-1] @ centred[1:] / 4, centred[:-2] @ centred[2:] / 4],
        )
        with pytest.raises(DomainError):
            empirical_acvf(values, 4)


class TestCriterionTable:
    def test_ties_go_to_smaller_horizon(self):
        table = CriterionTable("rmse")
        for horizon in (12.0, 10.0, 11.0):
            table.add_row(CriterionRow(horizon, rmse=0.5, mae=0.4, w1=0.6, w2=0.8))
        assert table.best.horizon == 10.0
        assert [row["T"] for row in table.get_rankings()] == [10.0, 11.0, 12.0]

    def test_maximized_measures(self):
        table = CriterionTable("w2")
        table.add_row(CriterionRow(5.0, rmse=0.4, w2=0.7))
        table.add_row(CriterionRow(6.0, rmse=0.5, w2=0.9))
        assert table.best.horizon == 6.0

    def test_failures_rank_last(self):
        table = CriterionTable("rmse")
        table.add_row(CriterionRow(5.0, error="OptimizerError: no convergence"))
        table.add_row(CriterionRow(6.0, rmse=0.5))
        assert table.best.horizon == 6.0
        assert table.rows[5.0].rank == 2
        frame = table.to_frame()
        assert list(frame.columns) == ["T", "rmse", "mae", "w1", "w2", "rank", "error"]
        assert "failed" in table.format_table()

    def test_all_failed(self):
        table = CriterionTable("mae")
        table.add_row(CriterionRow(5.0, error="DomainError: bad"))
        with pytest.raises(NumericalFailureError):
            table.best

    def test_unknown_criterion(self):
        with pytest.raises(DomainError):
            CriterionTable("r2")


class TestSelectT:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"t_grid": ()},
            {"t_grid": (10.0, 5.0)},
            {"t_grid": (0.0, 5.0)},
            {"t_grid": (5.0,), "criterion": "mse"},
            {"t_grid": (5.0,), "m_holdout": 1},
            {"t_grid": (5.0,), "fit_on": "test"},
        ],
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(DomainError):
            TSelectionConfig(**kwargs)

    def test_series_too_short(self):
        cfg = TSelectionConfig(t_grid=(5.0,), m_holdout=10)
        with pytest.raises(DomainError):
            select_t(np.arange(11.0), (1,), cfg)

    def test_table_contract(self):
        values = sample_fou_exact(OU, 300, 150.0, seed=make_generator(11)).values
        cfg = TSelectionConfig(t_grid=(100.0, 150.0, 200.0), m_holdout=20)
        options = FitOptions(sigma=1.0, hurst=0.5)
        best, table = select_t(values, (1,), cfg, options=options)
        assert len(table) == 3
        assert best in cfg.t_grid
        ok = [row for row in table.rows.values() if row.ok]
        assert ok
        assert table.best.rmse == min(row.rmse for row in ok)
        assert sorted(row.rank for row in table.rows.values()) == [1, 2, 3]
        assert table.rows[best].report is not None

    def test_threads_do_not_change_result(self):
        values = sample_fou_exact(OU, 200, 100.0, seed=make_generator(12)).values
        options = FitOptions(sigma=1.0, hurst=0.5)
        serial = select_t(values, (1,), TSelectionConfig(t_grid=(50.0, 100.0), m_holdout=10), options=options)
        pooled = select_t(
            values, (1,), TSelectionConfig(t_grid=(50.0, 100.0), m_holdout=10, threads=2), options=options
        )
        assert serial[0] == pooled[0]
        assert_allclose(serial[1].to_frame()["rmse"], pooled[1].to_frame()["rmse"])
