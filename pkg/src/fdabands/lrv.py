"""Long-run variance estimation via the lag-window (kernel) estimator.

The pointwise long-run variance sigma^2(t) is the sum over all lags of the
error autocovariances at t.  It is estimated by a weighted sum of empirical
lag covariances, sigma2_hat = sum_{l=-c}^{c} sigma2_hat_l * K(l/c), where K
is a kernel with K(0)=1, K(1)=0, K symmetric and vanishing outside [-1, 1].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    Curve,
    FunctionalTimeSeries,
    InvalidInputError,
    Segment,
    segment_mean,
)


@dataclass(frozen=True)
class Kernel:
    """Symmetric lag-window weight function with K(0)=1, K(1)=0, K=0 outside [-1,1]."""

    name: str
    evaluate: Callable[[float], float]

    def __call__(self, x):
        return self.evaluate(x)


def _bartlett(x):
    x = np.abs(np.asarray(x, dtype=float))
    return np.where(x <= 1.0, 1.0 - x, 0.0)


def _parzen(x):
    x = np.abs(np.asarray(x, dtype=float))
    inner = 1.0 - 6.0 * x**2 + 6.0 * x**3
    outer = 2.0 * (1.0 - np.clip(x, 0.0, 1.0)) ** 3
    return np.where(x <= 0.5, inner, np.where(x <= 1.0, outer, 0.0))


def _flat_top(x):
    # unit plateau to 1/2, linear taper hitting zero at 1
    x = np.abs(np.asarray(x, dtype=float))
    return np.clip(np.minimum(1.0, 2.0 * (1.0 - x)), 0.0, 1.0)


BARTLETT = Kernel("bartlett", _bartlett)
PARZEN = Kernel("parzen", _parzen)
FLAT_TOP = Kernel("flat_top", _flat_top)

KERNELS = {k.name: k for k in (BARTLETT, PARZEN, FLAT_TOP)}


def get_kernel(name: str) -> Kernel:
    try:
        return KERNELS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown kernel {name!r}; choose from {sorted(KERNELS)}"
        ) from None


@dataclass(frozen=True)
class LrvConfig:
    bandwidth: int | str = "auto"
    kernel: Kernel = BARTLETT

    def __post_init__(self):
        if self.bandwidth != "auto":
            if int(self.bandwidth) < 1:
                raise InvalidInputError("bandwidth must be a positive integer or 'auto'")


@dataclass(frozen=True)
class LrvEstimate:
    """Floored pointwise long-run variance plus the ingredients that built it."""

    sigma2: Curve
    lag_covs: dict = field(repr=False)  # lag -> Curve, for l = -c..c
    config: LrvConfig
    bandwidth: int
    floor: float

    @property
    def sigma(self) -> Curve:
        return Curve(np.sqrt(self.sigma2.values), self.sigma2.grid)


def segment_mean_assignment(x: FunctionalTimeSeries, segments) -> np.ndarray:
    """(n, T) matrix assigning to each index j the mean of its segment."""
    mu = np.empty_like(x.values)
    covered = np.zeros(x.n, dtype=bool)
    for seg in segments:
        mu[seg.start : seg.end] = segment_mean(x, seg).values
        covered[seg.start : seg.end] = True
    if not covered.all():
        raise InvalidInputError("segments do not cover every index of the series")
    return mu


def lag_covariance(x: FunctionalTimeSeries, seg_means: np.ndarray, l: int) -> Curve:
    """Empirical lag-l covariance curve with both factors centered at mu_hat^(j).

    For l >= 0 the sum runs over j = 0..n-l-1; for l < 0 over j = -l..n-1.
    Divisor is n in both cases.
    """
    mu = np.asarray(seg_means, dtype=float)
    n = x.n
    if mu.shape != x.values.shape:
        raise InvalidInputError("mean assignment shape must match the series")
    if abs(l) >= n:
        raise InvalidInputError(f"|lag| = {abs(l)} must be < n = {n}")
    if l >= 0:
        left = x.values[: n - l] - mu[: n - l]
        right = x.values[l:] - mu[: n - l]
    else:
        a = -l
        left = x.values[a:] - mu[a:]
        right = x.values[: n - a] - mu[a:]
    return Curve((left * right).sum(axis=0) / n, x.grid)


def auto_bandwidth(n: int) -> int:
    """Default bandwidth floor(n^(1/4)); satisfies c -> inf and c^3/n -> 0."""
    if n < 4:
        raise InvalidInputError("auto bandwidth needs n >= 4")
    return max(1, int(np.floor(n**0.25 + 1e-9)))


def estimate_lrv(
    x: FunctionalTimeSeries, seg_means: np.ndarray, cfg: LrvConfig | None = None
) -> LrvEstimate:
    """Lag-window long-run variance estimate on the grid.

    Sums kernel-weighted lag covariances for l = -c..c in ascending lag order
    (bit-reproducible), then floors the result at 1e-8 times its maximum so
    later divisions by sigma_hat are safe.
    """
    cfg = cfg or LrvConfig()
    n = x.n
    c = auto_bandwidth(n) if cfg.bandwidth == "auto" else int(cfg.bandwidth)
    if c >= n:
        raise InvalidInputError(f"bandwidth c = {c} must be < n = {n}")
    if c**3 / n >= 1.0:
        warnings.warn(
            f"bandwidth c = {c} violates c^3/n < 1 (n = {n}); estimate may be unstable",
            stacklevel=2,
        )
    lag_covs = {}
    total = np.zeros(len(x.grid))
    for l in range(-c, c + 1):
        cov = lag_covariance(x, seg_means, l)
        lag_covs[l] = cov
        total = total + float(cfg.kernel(l / c)) * cov.values
    floor = 1e-8 * max(float(total.max()), 0.0)
    if floor <= 0.0:
        floor = float(np.finfo(float).tiny)
    sigma2 = Curve(np.maximum(total, floor), x.grid)
    return LrvEstimate(sigma2=sigma2, lag_covs=lag_covs, config=cfg, bandwidth=c, floor=floor)
