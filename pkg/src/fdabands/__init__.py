"""Simultaneous uniform confidence bands for the segment means of a
functional time series, after change point detection and relevant-change
filtering, calibrated by a multiplier block bootstrap."""

__version__ = "0.1.0"

from .bands import (
    Band,
    ConfidenceBandSet,
    ContainmentResult,
    SegmentEstimate,
    build_bands,
    check_containment,
    segment_estimates,
)
from .bootstrap import (
    BootstrapConfig,
    BootstrapResult,
    ResidualSeries,
    auto_block_length,
    bootstrap_segment_mean,
    center_residuals,
    run_bootstrap,
)
from .core import (
    Curve,
    FunctionalTimeSeries,
    Grid,
    InternalInvariantError,
    InvalidInputError,
    Segment,
    segment_mean,
    segments_from_locations,
    sup_norm,
)
from .lrv import (
    BARTLETT,
    FLAT_TOP,
    KERNELS,
    PARZEN,
    Kernel,
    LrvConfig,
    LrvEstimate,
    auto_bandwidth,
    estimate_lrv,
    get_kernel,
    lag_covariance,
    segment_mean_assignment,
)
from .pipeline import AnalysisResult, PipelineConfig, analyze
from .segmentation import (
    ChangePointSet,
    RelevantChangeConfig,
    RelevantSet,
    SegmentationConfig,
    auto_delta,
    detect_change_points,
    relevant_set,
)
from .simulate import (
    CoverageReport,
    GroundTruth,
    ScenarioSpec,
    curve_values,
    generate,
    run_coverage_study,
)

__all__ = [name for name in dir() if not name.startswith("_")]
