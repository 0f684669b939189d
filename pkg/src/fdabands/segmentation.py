"""Change point estimation and the relevant-change filter.

Detection is binary segmentation on the functional CUSUM statistic: within
an interval, split at the argmax over candidate split points of
sup_t |U(s, t)|, recursing while the sup exceeds the threshold xi_n.  The
detector sits behind this module's function interface so an alternative
detector can be substituted.

A change i is relevant when the plug-in jump estimate
||mu_hat_i - mu_hat_{i-1}||_inf strictly exceeds the threshold Delta.  Index
0 is always part of the relevant set.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .bootstrap import _block_averages, _empirical_quantile, auto_block_length
from .core import (
    FunctionalTimeSeries,
    InvalidInputError,
    segment_mean,
    segments_from_locations,
    sup_norm,
)
from .lrv import estimate_lrv, segment_mean_assignment

# Gaussian-maximum scaling constant in the auto threshold
XI_SCALE = 1.5


@dataclass(frozen=True)
class SegmentationConfig:
    threshold: float | str = "auto"  # xi_n
    min_segment_length: int | None = None  # default max(20, ceil(sqrt(n)))
    max_changes: int = 50

    def __post_init__(self):
        if self.threshold != "auto" and float(self.threshold) <= 0.0:
            raise InvalidInputError("threshold must be positive or 'auto'")
        if self.min_segment_length is not None and self.min_segment_length < 2:
            raise InvalidInputError("min_segment_length must be >= 2")
        if self.max_changes < 0:
            raise InvalidInputError("max_changes must be >= 0")


@dataclass(frozen=True)
class ChangePointSet:
    """Ordered change indices and their rescaled locations s_i = j_i / n."""

    indices: tuple
    n: int
    threshold: float

    @property
    def locations(self) -> tuple:
        return tuple(j / self.n for j in self.indices)

    @property
    def m(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class RelevantChangeConfig:
    delta: float | str = "auto"
    beta: float = 0.05
    auto_fraction: float = 0.05
    auto_divisor: float = 3.0
    method: str = "plugin"  # or "bootstrap" for a beta-calibrated margin
    calibration_replications: int = 1000
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise InvalidInputError("beta must lie in (0, 1)")
        if self.delta != "auto" and float(self.delta) <= 0.0:
            raise InvalidInputError("delta must be positive or 'auto'")
        if not 0.0 < self.auto_fraction <= 0.5:
            raise InvalidInputError("auto_fraction must lie in (0, 0.5]")
        if self.auto_divisor <= 0.0:
            raise InvalidInputError("auto_divisor must be positive")
        if self.method not in ("plugin", "bootstrap"):
            raise InvalidInputError("method must be 'plugin' or 'bootstrap'")


@dataclass(frozen=True)
class RelevantSet:
    """Indices {0, i_1, ..., i_k} whose jumps strictly exceed delta."""

    indices: tuple
    jump_sizes: dict  # i >= 1 in the set -> ||mu_i - mu_{i-1}||_inf
    delta: float
    all_jumps: tuple  # jump size at every detected change, in order


def _best_split(values: np.ndarray, lo: int, hi: int, msl: int):
    """Max over admissible splits of the interval CUSUM; ties -> smallest index.

    Returns (statistic, global split index) or None when no split leaves both
    sides with at least msl curves.
    """
    m = hi - lo
    if m < 2 * msl:
        return None
    z = values[lo:hi]
    cs = np.cumsum(z, axis=0)
    total = cs[-1]
    ks = np.arange(msl, m - msl + 1)
    u = (cs[ks - 1] - np.outer(ks / m, total)) / np.sqrt(m)
    stats = np.abs(u).max(axis=1)
    best = int(np.argmax(stats))  # first max: smallest split index
    return float(stats[best]), lo + int(ks[best])


def _binseg(values: np.ndarray, xi: float, msl: int, max_changes: int) -> list:
    """Best-first binary segmentation; splits while the CUSUM sup exceeds xi."""
    heap = []

    def push(lo, hi):
        found = _best_split(values, lo, hi, msl)
        if found is not None:
            stat, j = found
            heapq.heappush(heap, (-stat, j, lo, hi))

    push(0, values.shape[0])
    changes = []
    while heap and len(changes) < max_changes:
        neg_stat, j, lo, hi = heapq.heappop(heap)
        if -neg_stat <= xi:
            break
        changes.append(j)
        push(lo, j)
        push(j, hi)
    return sorted(changes)


def _default_msl(n: int) -> int:
    return max(20, int(np.ceil(np.sqrt(n))))


def _auto_threshold(x: FunctionalTimeSeries, msl: int, max_changes: int) -> float:
    """xi_n = 1.5 * sigma_bar * sqrt(2 log n), sigma_bar from the lag-window LRV.

    The LRV needs segment means, so a pilot segmentation breaks the circular
    dependency: its threshold uses a first-difference variance proxy, which is
    robust to mean shifts.
    """
    n = x.n
    scale = np.sqrt(2.0 * np.log(n))
    floor = 1e-10 * max(1.0, float(np.abs(x.values).max()))

    diffs = np.diff(x.values, axis=0)
    proxy = (diffs**2).mean(axis=0) / 2.0
    pilot_xi = max(XI_SCALE * float(np.median(np.sqrt(proxy))) * scale, floor)
    pilot = _binseg(x.values, pilot_xi, msl, max_changes)

    segments = segments_from_locations(n, [j / n for j in pilot])
    lrv = estimate_lrv(x, segment_mean_assignment(x, segments))
    sigma_bar = float(np.median(np.sqrt(lrv.sigma2.values)))
    return max(XI_SCALE * sigma_bar * scale, floor)


def detect_change_points(
    x: FunctionalTimeSeries, cfg: SegmentationConfig | None = None
) -> ChangePointSet:
    """Estimate the number and rescaled locations of mean change points."""
    cfg = cfg or SegmentationConfig()
    msl = cfg.min_segment_length or _default_msl(x.n)
    if x.n < 2 * msl:
        raise InvalidInputError(
            f"series length {x.n} is below 2 * min_segment_length = {2 * msl}"
        )
    if cfg.threshold == "auto":
        xi = _auto_threshold(x, msl, cfg.max_changes)
    else:
        xi = float(cfg.threshold)
    changes = _binseg(x.values, xi, msl, cfg.max_changes)
    return ChangePointSet(indices=tuple(changes), n=x.n, threshold=xi)


def auto_delta(x: FunctionalTimeSeries, cfg: RelevantChangeConfig | None = None) -> float:
    """Data-driven Delta: sup-norm distance of the early and late window means
    divided by auto_divisor (windows hold the first and last ceil(fraction * n)
    curves)."""
    cfg = cfg or RelevantChangeConfig()
    w = int(np.ceil(cfg.auto_fraction * x.n))
    if w < 1:
        raise InvalidInputError("auto delta window contains no curves")
    mu_initial = x.values[:w].mean(axis=0)
    mu_final = x.values[-w:].mean(axis=0)
    return sup_norm(mu_final - mu_initial) / cfg.auto_divisor


def _bootstrap_margin(
    x: FunctionalTimeSeries, left, right, beta: float, replications: int, seed
) -> float:
    """(1 - beta)-quantile of the bootstrapped jump-estimate fluctuation.

    Reuses the multiplier block bootstrap on the residuals of the two segments
    adjacent to a change to calibrate how far a jump estimate can stray from
    its target under the null.
    """
    resid = np.array(x.values[left.start : right.end])
    resid[: left.length] -= resid[: left.length].mean(axis=0)
    resid[left.length :] -= resid[left.length :].mean(axis=0)
    L = auto_block_length(min(left.length, right.length))
    B = _block_averages(resid, L)
    seeds = np.random.SeedSequence(seed).spawn(replications)
    draws = np.empty(replications)
    for r, s in enumerate(seeds):
        nu = np.random.Generator(np.random.Philox(s)).standard_normal(resid.shape[0])
        boot_left = nu[: left.length] @ B[: left.length] / left.length
        boot_right = nu[left.length :] @ B[left.length :] / right.length
        draws[r] = np.abs(boot_right - boot_left).max()
    return _empirical_quantile(draws, 1.0 - beta)


def relevant_set(
    x: FunctionalTimeSeries,
    cps: ChangePointSet,
    cfg: RelevantChangeConfig | None = None,
) -> RelevantSet:
    """Filter detected changes down to those with jump sup-norm > Delta.

    Index 0 is always included.  In the default plug-in mode the comparison
    margin is 0; method='bootstrap' adds a beta-calibrated margin.
    """
    cfg = cfg or RelevantChangeConfig()
    if cps.n != x.n:
        raise InvalidInputError("change point set was computed for a different series")
    delta = auto_delta(x, cfg) if cfg.delta == "auto" else float(cfg.delta)
    if delta <= 0.0:
        raise InvalidInputError(
            "auto delta is zero (identical end windows); supply an explicit delta"
        )
    segments = segments_from_locations(x.n, cps.locations)
    means = [segment_mean(x, seg).values for seg in segments]
    jumps = [sup_norm(means[i] - means[i - 1]) for i in range(1, len(means))]

    indices = [0]
    jump_sizes = {}
    for i, jump in enumerate(jumps, start=1):
        margin = 0.0
        if cfg.method == "bootstrap":
            margin = _bootstrap_margin(
                x,
                segments[i - 1],
                segments[i],
                cfg.beta,
                cfg.calibration_replications,
                (cfg.rng_seed, i),
            )
        if jump > delta + margin:
            indices.append(i)
            jump_sizes[i] = jump
    return RelevantSet(
        indices=tuple(indices),
        jump_sizes=jump_sizes,
        delta=delta,
        all_jumps=tuple(jumps),
    )
