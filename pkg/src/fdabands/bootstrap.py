"""Multiplier block bootstrap for the sup-norm statistic of segment means.

Each replicate multiplies L-length block averages of the segment-centered
residuals by iid standard normal weights (one weight per time index, shared
across grid points and segments), forms bootstrap segment means, and records
T* = max_i sqrt(n_i) * sup_t |mu_i*(t) / sigma_hat(t)|.  The empirical
(1 - alpha)-quantile of the replicates calibrates the confidence bands.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Curve,
    FunctionalTimeSeries,
    InternalInvariantError,
    InvalidInputError,
    Segment,
    segment_mean,
)
from .lrv import LrvEstimate

RNG_ALGORITHM = "philox"


@dataclass(frozen=True)
class BootstrapConfig:
    block_length: int | str = "auto"
    replications: int = 2000
    alpha: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError("alpha must lie in (0, 1)")
        if self.block_length != "auto" and int(self.block_length) < 1:
            raise InvalidInputError("block length must be a positive integer or 'auto'")


@dataclass(frozen=True, eq=False)
class ResidualSeries:
    """Y_j = X_j - mu_hat^(j): observations minus their segment mean."""

    values: np.ndarray
    grid: object

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class BootstrapResult:
    statistics: np.ndarray = field(repr=False)
    quantile: float
    alpha: float
    block_length: int
    replications: int
    rng_seed: int
    rng_algorithm: str
    segment_diagnostics: dict = field(default_factory=dict)


def center_residuals(
    x: FunctionalTimeSeries, segments, means=None
) -> ResidualSeries:
    """Subtract from each curve the mean of the segment containing it.

    `segments` must partition [0, n); `means` optionally supplies the
    per-segment mean curves (recomputed when omitted).
    """
    segments = list(segments)
    if means is None:
        means = [segment_mean(x, seg) for seg in segments]
    y = np.array(x.values)
    covered = np.zeros(x.n, dtype=bool)
    for seg, mu in zip(segments, means):
        vals = mu.values if isinstance(mu, Curve) else np.asarray(mu, dtype=float)
        y[seg.start : seg.end] -= vals
        covered[seg.start : seg.end] = True
    if not covered.all():
        raise InternalInvariantError("some indices have no assigned segment")
    y.setflags(write=False)
    return ResidualSeries(values=y, grid=x.grid)


def auto_block_length(n_min: int) -> int:
    """Default block length floor(n_min^(1/3)), clamped to [1, n_min]."""
    if n_min < 2:
        raise InvalidInputError("auto block length needs a segment of length >= 2")
    return min(n_min, max(1, int(np.floor(np.cbrt(n_min) + 1e-9))))


def _block_averages(y_values: np.ndarray, L: int) -> np.ndarray:
    """B_j = len_j^(-1/2) * sum_{l<L} Y_{j+l}, truncated at the series end.

    Blocks that would run past the last index use the available indices only
    and rescale by the square root of the actual block length.
    """
    n = y_values.shape[0]
    padded = np.vstack([np.zeros((1,) + y_values.shape[1:]), np.cumsum(y_values, axis=0)])
    lengths = np.minimum(L, n - np.arange(n))
    ends = np.arange(n) + lengths
    sums = padded[ends] - padded[np.arange(n)]
    return sums / np.sqrt(lengths)[:, None]


def bootstrap_segment_mean(
    y: ResidualSeries, seg: Segment, L: int, multipliers
) -> Curve:
    """One bootstrap segment mean: n_i^(-1) * sum_j nu_j * (block average at j).

    `multipliers` supplies one standard-normal weight per index j in the
    segment, in order.
    """
    if L < 1:
        raise InvalidInputError("block length must be >= 1")
    if L > seg.length:
        raise InvalidInputError(
            f"block length {L} exceeds segment length {seg.length}"
        )
    nu = np.asarray(multipliers, dtype=float)
    if nu.shape != (seg.length,):
        raise InvalidInputError(
            f"need {seg.length} multipliers, got shape {nu.shape}"
        )
    B = _block_averages(y.values, L)[seg.start : seg.end]
    return Curve(nu @ B / seg.length, y.grid)


def _empirical_quantile(values: np.ndarray, level: float) -> float:
    """Smallest value whose ascending rank is >= ceil(level * R)."""
    r = values.size
    rank = int(np.ceil(level * r))
    rank = min(max(rank, 1), r)
    return float(np.sort(values)[rank - 1])


def run_bootstrap(
    y: ResidualSeries,
    segments,
    sigma2: LrvEstimate | Curve,
    cfg: BootstrapConfig,
) -> BootstrapResult:
    """R replicate statistics T* and their empirical (1 - alpha)-quantile.

    Replicates draw multipliers from per-replicate substreams spawned off
    cfg.rng_seed, so results are independent of any parallel scheduling and
    bit-identical for a fixed seed.
    """
    segments = list(segments)
    if not segments:
        raise InvalidInputError("need at least one segment (index 0 is always relevant)")
    R = int(cfg.replications)
    if R < 1:
        raise InvalidInputError("replications must be >= 1")
    if R < 100:
        warnings.warn("fewer than 100 bootstrap replications: quantile unstable", stacklevel=2)
    n_min = min(seg.length for seg in segments)
    L = auto_block_length(n_min) if cfg.block_length == "auto" else int(cfg.block_length)
    if not 1 <= L <= n_min:
        raise InvalidInputError(
            f"block length {L} must lie in [1, {n_min}] (shortest segment)"
        )
    sigma2_vals = sigma2.sigma2.values if isinstance(sigma2, LrvEstimate) else sigma2.values
    if np.any(sigma2_vals <= 0.0):
        raise InvalidInputError("sigma^2 must be floored strictly positive")
    sigma = np.sqrt(sigma2_vals)

    B = _block_averages(y.values, L)
    # per segment: scaled block matrix so that nu @ M gives sqrt(n_i)*mu_i*/sigma
    mats = [
        B[seg.start : seg.end] / (np.sqrt(seg.length) * sigma) for seg in segments
    ]

    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(R)
    nu = np.empty((R, y.n))
    for r, s in enumerate(seeds):
        nu[r] = np.random.Generator(np.random.Philox(s)).standard_normal(y.n)

    per_segment = np.empty((R, len(segments)))
    for k, (seg, mat) in enumerate(zip(segments, mats)):
        per_segment[:, k] = np.abs(nu[:, seg.start : seg.end] @ mat).max(axis=1)
    stats = per_segment.max(axis=1)
    q = _empirical_quantile(stats, 1.0 - cfg.alpha)

    argmax = per_segment.argmax(axis=1)
    diagnostics = {
        k: {
            "quantile": _empirical_quantile(per_segment[:, k], 1.0 - cfg.alpha),
            "max_share": float(np.mean(argmax == k)),
        }
        for k in range(len(segments))
    }
    stats.setflags(write=False)
    return BootstrapResult(
        statistics=stats,
        quantile=q,
        alpha=cfg.alpha,
        block_length=L,
        replications=R,
        rng_seed=cfg.rng_seed,
        rng_algorithm=RNG_ALGORITHM,
        segment_diagnostics=diagnostics,
    )
