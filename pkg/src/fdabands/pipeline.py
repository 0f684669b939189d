"""End-to-end analysis: detect changes, filter relevant ones, estimate the
long-run variance, bootstrap the quantile, and build the bands."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .bands import ConfidenceBandSet, build_bands, segment_estimates
from .bootstrap import BootstrapConfig, BootstrapResult, center_residuals, run_bootstrap
from .core import FunctionalTimeSeries, InvalidInputError, segments_from_locations
from .lrv import LrvConfig, LrvEstimate, estimate_lrv, segment_mean_assignment
from .segmentation import (
    ChangePointSet,
    RelevantChangeConfig,
    RelevantSet,
    SegmentationConfig,
    auto_delta,
    detect_change_points,
    relevant_set,
)


@dataclass(frozen=True)
class PipelineConfig:
    alpha: float = 0.1
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    relevant: RelevantChangeConfig = field(default_factory=RelevantChangeConfig)
    lrv: LrvConfig = field(default_factory=LrvConfig)
    block_length: int | str = "auto"
    replications: int = 2000
    rng_seed: int = 0
    # "alpha_half": bands use the (1 - alpha/2)-quantile of T*; "alpha" the
    # (1 - alpha)-quantile.  The default tracks the band definition; the
    # asymptotically tighter alpha mode undercovers at moderate n because the
    # block bootstrap scale is biased low for short blocks.
    band_quantile_mode: str = "alpha_half"
    quantile_override: float | None = None  # fixed quantile, skips calibration

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError("alpha must lie in (0, 1)")
        if self.band_quantile_mode not in ("alpha", "alpha_half"):
            raise InvalidInputError("band_quantile_mode must be 'alpha' or 'alpha_half'")


@dataclass(frozen=True)
class AnalysisResult:
    change_points: ChangePointSet
    relevant: RelevantSet
    segments: list
    estimates: list
    lrv: LrvEstimate
    bootstrap: BootstrapResult | None
    bands: ConfidenceBandSet
    delta: float
    config: PipelineConfig


def analyze(x: FunctionalTimeSeries, cfg: PipelineConfig | None = None) -> AnalysisResult:
    cfg = cfg or PipelineConfig()

    cps = detect_change_points(x, cfg.segmentation)

    if cfg.relevant.delta == "auto":
        delta = auto_delta(x, cfg.relevant)
        if delta <= 0.0:
            raise InvalidInputError(
                "auto delta is zero (identical end windows); supply an explicit delta"
            )
        rcfg = replace(cfg.relevant, delta=delta)
    else:
        rcfg = cfg.relevant
        delta = float(rcfg.delta)
    rel = relevant_set(x, cps, rcfg)

    segments = segments_from_locations(x.n, cps.locations)
    mu = segment_mean_assignment(x, segments)
    residuals = center_residuals(x, segments)
    lrv_est = estimate_lrv(x, mu, cfg.lrv)

    relevant_segments = [segments[i] for i in rel.indices]
    estimates = segment_estimates(x, relevant_segments)

    boot = None
    if cfg.quantile_override is not None:
        q = float(cfg.quantile_override)
    else:
        level_alpha = cfg.alpha if cfg.band_quantile_mode == "alpha" else cfg.alpha / 2.0
        boot = run_bootstrap(
            residuals,
            relevant_segments,
            lrv_est,
            BootstrapConfig(
                block_length=cfg.block_length,
                replications=cfg.replications,
                alpha=level_alpha,
                rng_seed=cfg.rng_seed,
            ),
        )
        q = boot.quantile

    metadata = {
        "n": x.n,
        "grid_size": len(x.grid),
        "alpha": cfg.alpha,
        "beta": rcfg.beta,
        "delta": delta,
        "band_quantile_mode": cfg.band_quantile_mode,
        "block_length": boot.block_length if boot else None,
        "replications": cfg.replications,
        "bandwidth": lrv_est.bandwidth,
        "kernel": lrv_est.config.kernel.name,
        "rng_seed": cfg.rng_seed,
        "rng_algorithm": boot.rng_algorithm if boot else None,
    }
    bands = build_bands(
        estimates, lrv_est, q, cfg.alpha, indices=rel.indices, metadata=metadata
    )

    return AnalysisResult(
        change_points=cps,
        relevant=rel,
        segments=segments,
        estimates=estimates,
        lrv=lrv_est,
        bootstrap=boot,
        bands=bands,
        delta=delta,
        config=cfg,
    )
