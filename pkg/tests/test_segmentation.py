import dataclasses

import numpy as np
import pytest

from fdabands import (
    ChangePointSet,
    FunctionalTimeSeries,
    Grid,
    InvalidInputError,
    RelevantChangeConfig,
    SegmentationConfig,
    auto_delta,
    detect_change_points,
    relevant_set,
)


def make_series(values):
    values = np.asarray(values, dtype=float)
    return FunctionalTimeSeries(values, Grid.uniform(values.shape[1]))


def brute_force_cusum(values, lo, hi):
    """Independent scan of every split point of [lo, hi); returns the argmax
    split index and the statistic, computed with plain loops."""
    m = hi - lo
    best_stat, best_j = -1.0, None
    total = values[lo:hi].sum(axis=0)
    for k in range(1, m):
        partial = values[lo : lo + k].sum(axis=0)
        stat = np.max(np.abs(partial - (k / m) * total)) / np.sqrt(m)
        if stat > best_stat:
            best_stat, best_j = stat, lo + k
    return best_j, best_stat


def jump_series(n, grid_size, jumps, noise_sd, seed):
    """Piecewise-constant means with specified (location, mean curve) jumps."""
    rng = np.random.default_rng(seed)
    grid = Grid.uniform(grid_size)
    vals = rng.normal(scale=noise_sd, size=(n, grid_size))
    for s, curve in jumps:
        vals[int(n * s) :] += np.asarray(curve)
    return FunctionalTimeSeries(vals, grid)


class TestDetectChangePoints:
    def test_single_jump(self):
        grid_size = 20
        t = np.linspace(0, 1, grid_size)
        x = jump_series(200, grid_size, [(0.5, 10.0 * t)], noise_sd=0.1, seed=0)
        cps = detect_change_points(x)
        assert cps.m == 1
        assert 0.45 <= cps.locations[0] <= 0.55
        # the split must sit at the peak of an independent brute-force scan
        j_oracle, _ = brute_force_cusum(np.asarray(x.values), 0, 200)
        assert cps.indices[0] == j_oracle

    def test_constant_mean_returns_empty(self):
        rng = np.random.default_rng(1)
        x = make_series(rng.normal(size=(150, 8)))
        cps = detect_change_points(x, SegmentationConfig(threshold=50.0))
        assert cps.indices == ()
        assert cps.m == 0

    def test_two_jumps(self):
        grid_size = 15
        x = jump_series(
            300,
            grid_size,
            [(1 / 3, np.full(grid_size, 10.0)), (2 / 3, np.full(grid_size, -10.0))],
            noise_sd=0.1,
            seed=2,
        )
        cps = detect_change_points(x)
        assert cps.m == 2
        assert abs(cps.locations[0] - 1 / 3) <= 0.05
        assert abs(cps.locations[1] - 2 / 3) <= 0.05
        # brute-force binary segmentation oracle: first split, then each side
        vals = np.asarray(x.values)
        j1, _ = brute_force_cusum(vals, 0, 300)
        left, _ = brute_force_cusum(vals, 0, j1)
        right, _ = brute_force_cusum(vals, j1, 300)
        assert set(cps.indices) <= {j1, left, right}

    def test_noiseless_exact_recovery(self):
        # unequal jump sizes keep the CUSUM argmax unique (equal same-sign
        # jumps create a flat plateau with no distinguished maximizer)
        grid_size = 6
        x = jump_series(
            120,
            grid_size,
            [(1 / 3, np.full(grid_size, 5.0)), (2 / 3, np.full(grid_size, 3.0))],
            noise_sd=0.0,
            seed=3,
        )
        cps = detect_change_points(x)
        assert cps.indices == (40, 80)

    def test_series_too_short(self):
        x = make_series(np.zeros((30, 4)))
        with pytest.raises(InvalidInputError):
            detect_change_points(x)  # default msl = 20 needs n >= 40

    def test_deterministic(self):
        x = jump_series(200, 10, [(0.5, np.full(10, 8.0))], noise_sd=0.5, seed=4)
        a = detect_change_points(x)
        b = detect_change_points(x)
        assert a.indices == b.indices and a.threshold == b.threshold

    def test_grid_permutation_equivariance(self):
        # the CUSUM takes a sup over t, so reordering grid columns
        # consistently across curves leaves the detected indices unchanged
        x = jump_series(200, 10, [(0.4, np.linspace(0, 9, 10))], noise_sd=0.3, seed=5)
        perm = np.random.default_rng(6).permutation(10)
        x_perm = FunctionalTimeSeries(np.asarray(x.values)[:, perm], x.grid)
        assert detect_change_points(x).indices == detect_change_points(x_perm).indices

    def test_max_changes_cap(self):
        grid_size = 5
        x = jump_series(
            240,
            grid_size,
            [(0.25, np.full(grid_size, 10.0)), (0.5, np.full(grid_size, 10.0)), (0.75, np.full(grid_size, 10.0))],
            noise_sd=0.1,
            seed=7,
        )
        cps = detect_change_points(x, SegmentationConfig(max_changes=1))
        assert cps.m == 1


class TestAutoDelta:
    def test_identical_end_windows(self):
        x = make_series(np.ones((100, 5)))
        assert auto_delta(x) == 0.0

    def test_fixture_19_8(self):
        # first and last 5% windows differ by exactly 19.8 in sup-norm
        vals = np.zeros((100, 5))
        vals[50:] = 19.8
        x = make_series(vals)
        assert auto_delta(x) == pytest.approx(6.6, abs=1e-12)

    def test_constant_shift(self):
        vals = np.zeros((200, 4))
        vals[100:] = 9.0
        x = make_series(vals)
        assert auto_delta(x) == pytest.approx(3.0, abs=1e-12)

    def test_scaling(self):
        rng = np.random.default_rng(8)
        vals = rng.normal(size=(100, 4))
        vals[50:] += 5.0
        x = make_series(vals)
        lam = 2.5
        x_scaled = make_series(lam * vals)
        assert auto_delta(x_scaled) == pytest.approx(lam * auto_delta(x), rel=1e-12)

    def test_invalid_fraction_rejected(self):
        with pytest.raises(InvalidInputError):
            RelevantChangeConfig(auto_fraction=0.0)
        with pytest.raises(InvalidInputError):
            RelevantChangeConfig(auto_fraction=0.6)


def two_jump_series(sizes=(8.1, 2.0), n=120, grid_size=5, seed=9, noise_sd=0.0):
    rng = np.random.default_rng(seed)
    vals = rng.normal(scale=noise_sd, size=(n, grid_size))
    vals[n // 3 :] += sizes[0]
    vals[2 * n // 3 :] += sizes[1]
    return make_series(vals)


class TestRelevantSet:
    def test_no_change_points(self):
        x = make_series(np.zeros((50, 3)) + 1.0)
        cps = ChangePointSet(indices=(), n=50, threshold=1.0)
        rel = relevant_set(x, cps, RelevantChangeConfig(delta=1.0))
        assert rel.indices == (0,)
        assert rel.jump_sizes == {}

    def test_plugin_filter(self):
        x = two_jump_series((8.1, 2.0))
        cps = ChangePointSet(indices=(40, 80), n=120, threshold=1.0)
        rel = relevant_set(x, cps, RelevantChangeConfig(delta=6.6))
        assert rel.indices == (0, 1)
        assert rel.jump_sizes[1] == pytest.approx(8.1, abs=1e-12)
        assert rel.all_jumps == pytest.approx((8.1, 2.0), abs=1e-12)

    def test_boundary_jump_excluded(self):
        # strict inequality: a jump exactly equal to delta is not relevant
        x = two_jump_series((3.0, 1.0))
        cps = ChangePointSet(indices=(40, 80), n=120, threshold=1.0)
        rel = relevant_set(x, cps, RelevantChangeConfig(delta=3.0))
        assert rel.indices == (0,)

    def test_monotone_in_delta(self):
        x = two_jump_series((8.1, 2.0), noise_sd=0.2)
        cps = ChangePointSet(indices=(40, 80), n=120, threshold=1.0)
        previous = None
        for delta in (0.5, 2.5, 9.0):
            rel = relevant_set(x, cps, RelevantChangeConfig(delta=delta))
            if previous is not None:
                assert set(rel.indices) <= set(previous)
            previous = rel.indices
        assert 0 in previous

    def test_scaling_leaves_relevance_unchanged(self):
        x = two_jump_series((8.1, 2.0), noise_sd=0.3)
        cps = ChangePointSet(indices=(40, 80), n=120, threshold=1.0)
        lam = 4.0
        x_scaled = make_series(lam * np.asarray(x.values))
        base = relevant_set(x, cps, RelevantChangeConfig(delta=3.0))
        scaled = relevant_set(x_scaled, cps, RelevantChangeConfig(delta=lam * 3.0))
        assert base.indices == scaled.indices
        for i in base.jump_sizes:
            assert scaled.jump_sizes[i] == pytest.approx(lam * base.jump_sizes[i], rel=1e-12)

    def test_bootstrap_calibrated_mode(self):
        x = two_jump_series((8.1, 2.0), noise_sd=0.5, n=180)
        cps = ChangePointSet(indices=(60, 120), n=180, threshold=1.0)
        cfg = RelevantChangeConfig(delta=6.0, beta=0.1, method="bootstrap")
        rel = relevant_set(x, cps, cfg)
        # the large jump clears delta plus the calibrated margin; the small
        # one never does
        assert rel.indices == (0, 1)

    def test_auto_delta_zero_rejected(self):
        x = make_series(np.ones((60, 3)))
        cps = ChangePointSet(indices=(), n=60, threshold=1.0)
        with pytest.raises(InvalidInputError):
            relevant_set(x, cps, RelevantChangeConfig(delta="auto"))
