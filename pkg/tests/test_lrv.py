import numpy as np
import pytest

from fdabands import (
    BARTLETT,
    FLAT_TOP,
    KERNELS,
    PARZEN,
    FunctionalTimeSeries,
    Grid,
    InvalidInputError,
    Kernel,
    LrvConfig,
    ScenarioSpec,
    auto_bandwidth,
    estimate_lrv,
    generate,
    get_kernel,
    lag_covariance,
    segment_mean_assignment,
    segments_from_locations,
)


def error_series(n, grid_size, process, param, seed, tau2=1.0):
    """Zero-mean series drawn from the synthetic error model."""
    spec = ScenarioSpec(
        n=n,
        grid_size=grid_size,
        means=[0.0],
        change_locations=[],
        error_process=process,
        error_param=param,
        tau2=tau2,
        rng_seed=seed,
    )
    x, truth = generate(spec)
    return x, truth


def single_segment_means(x):
    return segment_mean_assignment(x, segments_from_locations(x.n, []))


class TestKernels:
    @pytest.mark.parametrize("kernel", [BARTLETT, PARZEN, FLAT_TOP])
    def test_axioms(self, kernel):
        assert kernel(0.0) == 1.0
        assert kernel(1.0) == 0.0
        assert kernel(-1.0) == 0.0
        xs = np.linspace(-3.0, 3.0, 121)
        vals = kernel(xs)
        assert np.all(vals[np.abs(xs) > 1.0] == 0.0)
        assert np.allclose(kernel(xs), kernel(-xs))  # symmetry

    def test_lookup(self):
        assert get_kernel("parzen") is PARZEN
        with pytest.raises(InvalidInputError):
            get_kernel("gaussian")
        assert set(KERNELS) == {"bartlett", "parzen", "flat_top"}


class TestLagCovariance:
    def test_lag0_is_biased_variance(self):
        x, _ = error_series(200, 10, "iid", 0.0, seed=0)
        mu = single_segment_means(x)
        cov0 = lag_covariance(x, mu, 0)
        resid = x.values - mu
        assert np.allclose(cov0.values, (resid**2).sum(axis=0) / x.n)

    def test_iid_lag1_near_zero(self):
        x, _ = error_series(5000, 10, "iid", 0.0, seed=1)
        cov1 = lag_covariance(x, single_segment_means(x), 1)
        assert np.all(np.abs(cov1.values) < 0.1)  # true value is 0

    def test_ma1_lag1(self):
        # MA(1) with theta = 0.5 and unit innovation variance has lag-1
        # autocovariance theta * tau^2 = 0.5
        x, _ = error_series(5000, 10, "ma1", 0.5, seed=2)
        cov1 = lag_covariance(x, single_segment_means(x), 1)
        assert np.all(np.abs(cov1.values - 0.5) < 0.1)

    def test_symmetry_single_segment(self):
        # with one segment the centering is the same in both directions, so
        # the +l and -l sums run over identical products
        x, _ = error_series(80, 6, "ar1", 0.3, seed=3)
        mu = single_segment_means(x)
        for l in (1, 2, 5):
            assert np.allclose(
                lag_covariance(x, mu, l).values,
                lag_covariance(x, mu, -l).values,
                atol=1e-14,
            )

    def test_lag_bound(self):
        x, _ = error_series(10, 4, "iid", 0.0, seed=4)
        with pytest.raises(InvalidInputError):
            lag_covariance(x, single_segment_means(x), 10)
        with pytest.raises(InvalidInputError):
            lag_covariance(x, single_segment_means(x), -10)


class TestAutoBandwidth:
    def test_values(self):
        assert auto_bandwidth(16) == 2
        assert auto_bandwidth(10000) == 10
        assert auto_bandwidth(1830) == 6  # floor(1830^0.25) computed by hand
        assert auto_bandwidth(4) == 1

    def test_too_small(self):
        with pytest.raises(InvalidInputError):
            auto_bandwidth(3)


class TestEstimateLrv:
    def test_iid_matches_pointwise_variance(self):
        tau2_spec = {"kind": "linear", "intercept": 0.5, "slope": 1.0}  # 0.5 + t
        x, truth = error_series(5000, 20, "iid", 0.0, seed=13, tau2=tau2_spec)
        est = estimate_lrv(x, single_segment_means(x), LrvConfig(bandwidth=10))
        rel = np.abs(est.sigma2.values - truth.lrv.values) / truth.lrv.values
        assert rel.max() < 0.10

    def test_ar1_long_run_variance(self):
        # AR(1): long-run variance tau^2 / (1 - rho)^2
        x, truth = error_series(10000, 20, "ar1", 0.4, seed=5)
        est = estimate_lrv(
            x, single_segment_means(x), LrvConfig(bandwidth="auto", kernel=FLAT_TOP)
        )
        assert est.bandwidth == 10
        rel = np.abs(est.sigma2.values - truth.lrv.values) / truth.lrv.values
        assert rel.max() < 0.15

    def test_bandwidth_warning(self):
        x, _ = error_series(60, 5, "iid", 0.0, seed=6)
        with pytest.warns(UserWarning, match="c\\^3/n"):
            est = estimate_lrv(x, single_segment_means(x), LrvConfig(bandwidth=5))
        assert est.sigma2.values.shape == (5,)

    def test_bandwidth_too_large(self):
        x, _ = error_series(20, 5, "iid", 0.0, seed=7)
        with pytest.raises(InvalidInputError):
            estimate_lrv(x, single_segment_means(x), LrvConfig(bandwidth=20))

    def test_scaling_by_lambda_squared(self):
        x, _ = error_series(400, 8, "ma1", 0.3, seed=8)
        mu = single_segment_means(x)
        est = estimate_lrv(x, mu, LrvConfig(bandwidth=4))
        scaled = FunctionalTimeSeries(3.0 * np.array(x.values), x.grid)
        est_scaled = estimate_lrv(scaled, 3.0 * mu, LrvConfig(bandwidth=4))
        assert np.allclose(est_scaled.sigma2.values, 9.0 * est.sigma2.values, rtol=1e-12)

    def test_indicator_kernel_recovers_lag0(self):
        x, _ = error_series(300, 6, "ar1", 0.5, seed=9)
        mu = single_segment_means(x)
        indicator = Kernel("indicator", lambda v: np.where(np.asarray(v) == 0.0, 1.0, 0.0))
        est = estimate_lrv(x, mu, LrvConfig(bandwidth=3, kernel=indicator))
        assert np.allclose(est.sigma2.values, lag_covariance(x, mu, 0).values)

    def test_records_all_lags(self):
        x, _ = error_series(100, 4, "iid", 0.0, seed=10)
        est = estimate_lrv(x, single_segment_means(x), LrvConfig(bandwidth=3))
        assert sorted(est.lag_covs) == list(range(-3, 4))

    def test_floor_on_degenerate_data(self):
        x = FunctionalTimeSeries(np.ones((50, 4)), Grid.uniform(4))
        est = estimate_lrv(x, single_segment_means(x), LrvConfig(bandwidth=2))
        assert np.all(est.sigma2.values > 0.0)

    def test_consistency_trend(self):
        # sup error decreases statistically as n grows (trend over seeds)
        true = 1.0 / (1.0 - 0.4) ** 2
        mean_errs = []
        for n in (500, 2000, 10000):
            errs = []
            for seed in range(5):
                x, _ = error_series(n, 10, "ar1", 0.4, seed=100 + seed)
                est = estimate_lrv(
                    x, single_segment_means(x), LrvConfig(kernel=FLAT_TOP)
                )
                errs.append(np.max(np.abs(est.sigma2.values - true)))
            mean_errs.append(np.mean(errs))
        assert mean_errs[0] > mean_errs[1] > mean_errs[2]
