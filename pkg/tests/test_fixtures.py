"""Reproductions on the bundled series and the desk-scale Monte Carlo cell."""

import numpy as np
import pytest

from foukit.config import get_scenario
from foukit.estimate import FitOptions, contrast_grid, estimate_h_sigma, fit_fou, fit_lambda
from foukit.forecast import TSelectionConfig, all_measures, gaussian_loglik_aic, prediction_run, select_t
from foukit.io import load_fixture
from foukit.model import FouModel
from foukit.simcore import SamplePath

pytestmark = pytest.mark.fixture_data

BOX = (0.01, 1.5)


@pytest.fixture(scope="module")
def series_a():
    return load_fixture("series_a")


@pytest.fixture(scope="module")
def lake_huron():
    return load_fixture("lake_huron")


def strictly_inside(values, box=BOX, margin=1e-3):
    lo, hi = box
    return all(lo + margin < v < hi - margin for v in values)


class TestSeriesA:
    def test_hurst_and_sigma(self, series_a):
        path = SamplePath(series_a - series_a.mean(), 12.0)
        h_hat, sigma_hat = estimate_h_sigma(path)
        assert abs(h_hat - 0.1367) < 0.005
        assert abs(sigma_hat - 0.5464) < 0.01
        assert sigma_hat == pytest.approx(0.5400, abs=1e-3)

    def test_double_root_fit_is_interior(self, series_a):
        report = fit_fou(SamplePath(series_a, 12.0), (2,))
        assert report.converged
        assert strictly_inside(report.lambda_hat)
        assert abs(report.lambda_hat[0] - 0.103) < 0.003

    def test_double_root_fit_at_reference_stage_one(self, series_a):
        path = SamplePath(series_a - series_a.mean(), 12.0)
        report = fit_lambda(path, (2,), 0.5464, 0.1367)
        assert strictly_inside(report.lambda_hat)
        assert abs(report.lambda_hat[0] - 0.1327) < 0.003

    def test_triple_root_aic(self, series_a):
        path = SamplePath(series_a, 12.0)
        report = fit_fou(path, (3,))
        assert abs(report.lambda_hat[0] - 0.178) < 0.005
        _, aic = gaussian_loglik_aic(report.to_model(), path)
        assert abs(aic - 105.88) < 2.0

    @pytest.mark.slow
    def test_horizon_selection(self, series_a):
        grid = tuple(float(t) for t in range(7, 26))
        cfg = TSelectionConfig(t_grid=grid, criterion="rmse", m_holdout=50)
        best, table = select_t(series_a, (2,), cfg)
        assert len(table) == 19
        assert best <= 12.0
        late = [table.rows[t].rmse for t in grid if t >= 13.0]
        assert np.all(np.diff(late) > 0)
        assert table.rows[best].rmse < 0.2975


class TestLakeHuron:
    def test_contrast_increases_from_the_floor(self, lake_huron):
        path = SamplePath(lake_huron, 30.0)
        _, values = contrast_grid(path, (3,), 1.0, 0.5, points=20)
        assert np.all(np.diff(values) > 0)

    @pytest.mark.parametrize(
        "structure, lambdas, w2, rmse",
        [((3,), (0.01,), 0.9090, 0.7747), ((1, 1), (0.01, 0.02), 0.9090, 0.7743)],
    )
    def test_prediction_quality(self, lake_huron, structure, lambdas, w2, rmse):
        path = SamplePath(lake_huron, 30.0)
        report = fit_fou(path, structure, options=FitOptions(sigma=1.0, hurst=0.5))
        np.testing.assert_allclose(report.lambda_hat, lambdas, atol=1e-4)
        measures = all_measures(prediction_run(report.to_model(), path, 40))
        assert abs(measures["w2"] - w2) < 0.002
        assert abs(measures["rmse"] - rmse) < 0.002
        assert measures["w2"] > 0.8867

    def test_interior_triple_root_matches_reference_table(self, lake_huron):
        path = SamplePath(lake_huron, 30.0)
        model = FouModel.repeated(0.375, 3, sigma=1.0, hurst=0.5)
        measures = all_measures(prediction_run(model, path, 40))
        assert abs(measures["w2"] - 0.8867) < 0.01
        assert abs(measures["rmse"] - 0.7568) < 0.01


@pytest.mark.slow
def test_desk_double_root_cell():
    study = get_scenario("desk_double_root_h07").to_study_config().to_study()
    row = study.run(verbose=False).iloc[0]
    assert row["failures"] == 0
    assert abs(row["h_mean"] - 0.70) < 0.02
    assert abs(row["sigma_mean"] - 1.00) < 0.08
    assert abs(row["lambda1_mean"] - 0.80) < 0.15
    assert np.isfinite(row["lambda1_sd"])
