import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

import foukit.simcore.sampler as sampler
from foukit.errors import CirculantEmbeddingError, DataError, DomainError
from foukit.model import FouModel, acvf
from foukit.simcore import (
    SamplePath,
    SimConfig,
    make_generator,
    sample_fgn,
    sample_fou_exact,
    sample_fou_operator_path,
    simulate,
)
from foukit.simcore.sampler import (
    apply_operator,
    circulant_sample,
    fgn_autocovariance,
    operator_path_from_increments,
)

DOUBLE = FouModel.repeated(0.8, 2, sigma=1.0, hurst=0.5)


class TestSamplePath:
    def test_grid(self):
        path = SamplePath([1.0, 2.0, 3.0, 4.0], 2.0)
        assert path.n == 4
        assert path.delta == 0.5
        assert_allclose(path.times, [0.5, 1.0, 1.5, 2.0])
        frame = path.to_frame()
        assert list(frame.columns) == ["t", "x"]

    def test_head_keeps_spacing(self):
        path = SamplePath(np.arange(10.0), 5.0)
        head = path.head(4)
        assert head.n == 4
        assert head.delta == path.delta
        assert head.horizon == 2.0

    def test_values_are_read_only(self):
        path = SamplePath([1.0, 2.0], 1.0)
        with pytest.raises(ValueError):
            path.values[0] = 5.0

    @pytest.mark.parametrize(
        "values, horizon, error",
        [
            ([1.0], 1.0, DataError),
            ([1.0, float("nan")], 1.0, DataError),
            ([1.0, 2.0], 0.0, DomainError),
            ([1.0, 2.0], -3.0, DomainError),
        ],
    )
    def test_invalid(self, values, horizon, error):
        with pytest.raises(error):
            SamplePath(values, horizon)


class TestGenerators:
    def test_streams_are_reproducible(self):
        a = make_generator(42, 3, 7).standard_normal(5)
        b = make_generator(42, 3, 7).standard_normal(5)
        assert_array_equal(a, b)

    def test_streams_differ(self):
        a = make_generator(42, 3, 7).standard_normal(5)
        b = make_generator(42, 3, 8).standard_normal(5)
        c = make_generator(43, 3, 7).standard_normal(5)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("seed, stream", [(-1, ()), (2**64, ()), (1, (-2,))])
    def test_invalid_seed(self, seed, stream):
        with pytest.raises(DomainError):
            make_generator(seed, *stream)


class TestFgn:
    def test_autocovariance_formula(self):
        gamma = fgn_autocovariance(0.7, 1.0, 1.0, 3)
        assert_allclose(gamma[0], 1.0)
        assert_allclose(gamma[1], (2**1.4 - 2.0) / 2.0, rtol=1e-14)

    def test_brownian_increments_uncorrelated(self):
        x = sample_fgn(0.5, 1.0, 100_000, 1.0, seed=1)
        r1 = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert abs(r1) < 0.01

    def test_variance_and_lag_one(self):
        x = sample_fgn(0.7, 1.0, 100_000, 1.0, seed=2)
        assert abs(x.var() - 1.0) < 0.02
        lag1 = np.mean((x[:-1] - x.mean()) * (x[1:] - x.mean()))
        assert abs(lag1 - 0.3195) < 0.03

    def test_scale(self):
        x = sample_fgn(0.3, 2.0, 50_000, 0.01, seed=3)
        expected = 4.0 * 0.01**0.6
        assert abs(x.var() / expected - 1.0) < 0.03

    def test_negative_embedding_is_reported(self):
        gamma = np.array([1.0, 0.9, 0.0])
        with pytest.raises(CirculantEmbeddingError) as excinfo:
            circulant_sample(gamma, make_generator(0))
        assert "eigenvalue" in str(excinfo.value)


class TestExactSampler:
    def test_deterministic(self):
        a = sample_fou_exact(DOUBLE, 256, 25.0, seed=11)
        b = sample_fou_exact(DOUBLE, 256, 25.0, seed=11)
        c = sample_fou_exact(DOUBLE, 256, 25.0, seed=12)
        assert_array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_simulate_dispatch(self):
        direct = sample_fou_exact(DOUBLE, 128, 10.0, seed=5)
        routed = simulate(DOUBLE, 128, 10.0, SimConfig(seed=5))
        assert_array_equal(direct.values, routed.values)

    def test_generator_seed(self):
        a = sample_fou_exact(DOUBLE, 64, 5.0, seed=make_generator(9, 1))
        b = sample_fou_exact(DOUBLE, 64, 5.0, seed=make_generator(9, 1))
        assert_array_equal(a.values, b.values)

    def test_moments(self):
        path = sample_fou_exact(DOUBLE, 10_000, 1000.0, seed=21)
        # about 400 effectively independent blocks
        assert abs(path.values.var() - 0.3125) < 0.07
        assert abs(path.values.mean()) < 3 * math.sqrt(0.3125 / 400)

    def test_cholesky_fallback(self, monkeypatch):
        def failing(gamma, rng):
            raise CirculantEmbeddingError(-1.0, 2 * (gamma.size - 1))

        monkeypatch.setattr(sampler, "circulant_sample", failing)
        model = FouModel.from_lambdas([0.4, 1.2], hurst=0.35)
        path = sample_fou_exact(model, 64, 8.0, seed=3)
        assert path.n == 64
        again = sample_fou_exact(model, 64, 8.0, seed=3)
        assert_array_equal(path.values, again.values)

    def test_invalid_size(self):
        with pytest.raises(DomainError):
            sample_fou_exact(DOUBLE, 1, 10.0)


class TestOperatorPath:
    def test_exponential_kernel_on_smooth_input(self):
        step, lam = 0.01, 0.8
        t = step * np.arange(1, 1001)
        increments = np.diff(np.sin(t), prepend=0.0)
        values = apply_operator(increments, lam, 0, step)
        expected = (lam * np.cos(t) + np.sin(t) - lam * np.exp(-lam * t)) / (lam**2 + 1.0)
        assert_allclose(values, expected, atol=1e-4)

    def test_repeated_root_expansion_matches_composition(self):
        step, lam = 0.005, 0.6
        t = step * np.arange(1, 4001)
        increments = np.diff(np.sin(t) + 0.3 * np.cos(2.1 * t), prepend=0.0)
        first = apply_operator(increments, lam, 0, step)
        composed = apply_operator(np.diff(first, prepend=0.0), lam, 0, step)
        expanded = operator_path_from_increments(FouModel.repeated(lam, 2), increments, step)
        assert_allclose(expanded, composed, atol=1e-3)

    def test_distinct_expansion_matches_composition(self):
        step = 0.005
        t = step * np.arange(1, 4001)
        increments = np.diff(np.sin(1.3 * t), prepend=0.0)
        first = apply_operator(increments, 0.8, 0, step)
        composed = apply_operator(np.diff(first, prepend=0.0), 0.3, 0, step)
        expanded = operator_path_from_increments(FouModel.from_lambdas([0.3, 0.8]), increments, step)
        assert_allclose(expanded, composed, atol=1e-3)

    def test_burn_in_floor(self):
        cfg = SimConfig(method="operator_path", burn_in=1.0)
        with pytest.raises(DomainError):
            sample_fou_operator_path(FouModel.from_lambdas([0.8]), 100, 10.0, cfg)

    def test_deterministic(self):
        cfg = SimConfig(seed=4, method="operator_path")
        model = FouModel.from_lambdas([0.5, 1.0], multiplicities=[2, 1], hurst=0.6)
        a = simulate(model, 200, 20.0, cfg)
        b = simulate(model, 200, 20.0, cfg)
        assert_array_equal(a.values, b.values)

    def test_ornstein_uhlenbeck_variance(self):
        model = FouModel.from_lambdas([0.8], sigma=1.0, hurst=0.5)
        cfg = SimConfig(seed=8, method="operator_path")
        path = sample_fou_operator_path(model, 20_000, 20_000.0, cfg)
        assert abs(path.values.var() / 0.625 - 1.0) < 0.05

    def test_burn_in_sensitivity(self):
        model = FouModel.repeated(0.8, 2, hurst=0.7)
        short = SimConfig(seed=13, method="operator_path", burn_in=12.5)
        long = SimConfig(seed=13, method="operator_path", burn_in=25.0)
        a = sample_fou_operator_path(model, 20_000, 20_000.0, short)
        b = sample_fou_operator_path(model, 20_000, 20_000.0, long)
        assert abs(a.values.var() / b.values.var() - 1.0) < 0.1

    @pytest.mark.slow
    def test_marginals_agree_with_exact_sampler(self):
        model = FouModel.from_lambdas([0.3, 0.8], hurst=0.7)
        cfg = SimConfig(method="operator_path", burn_in=40.0)
        exact = [sample_fou_exact(model, 20, 10.0, seed=make_generator(1, r)).values[-1] for r in range(800)]
        operator = [
            sample_fou_operator_path(model, 20, 10.0, cfg, seed=make_generator(2, r)).values[-1]
            for r in range(800)
        ]
        assert stats.ks_2samp(exact, operator).pvalue > 0.001
        assert abs(np.var(exact) / acvf(model, 0.0) - 1.0) < 0.2
