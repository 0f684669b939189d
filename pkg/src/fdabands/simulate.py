"""Synthetic functional time series with known means and long-run variance,
plus the Monte Carlo harness that checks the simultaneous coverage guarantee.

Innovations are smooth random curves eta_j(t) = sum_k Z_jk * sqrt(2) *
cos(k*pi*t) / k (K = 20, iid standard normal Z), rescaled pointwise to hit
the requested innovation variance tau^2(t).  The cosine basis keeps the
variance strictly positive on the whole grid, endpoints included, so the
rescaling is well defined.  Serial dependence (MA(1) or AR(1)) is scalar and
uniform across t, so the pointwise long-run variance has a closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .bands import check_containment
from .core import (
    Curve,
    FunctionalTimeSeries,
    Grid,
    InternalInvariantError,
    InvalidInputError,
    segments_from_locations,
    sup_norm,
)
from .pipeline import AnalysisResult, PipelineConfig, analyze

N_BASIS = 20

ERROR_PROCESSES = ("iid", "ma1", "ar1")
_AR_BURN_IN = 100


def curve_values(spec, grid: Grid) -> np.ndarray:
    """Evaluate an analytic curve spec on the grid.

    Accepts a Curve, an array of grid values, a scalar (constant curve), or a
    dict: {"kind": "constant", "value": v}, {"kind": "linear", "intercept": a,
    "slope": b}, {"kind": "sine", "amplitude": a, "frequency": k}, or
    {"kind": "hat", "peak": h, "center": c}.
    """
    t = grid.points
    if isinstance(spec, Curve):
        if spec.grid != grid:
            raise InvalidInputError("curve spec is on a different grid")
        return np.array(spec.values)
    if isinstance(spec, (int, float)):
        return np.full(t.size, float(spec))
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "constant":
            return np.full(t.size, float(spec["value"]))
        if kind == "linear":
            return float(spec.get("intercept", 0.0)) + float(spec.get("slope", 0.0)) * t
        if kind == "sine":
            return float(spec["amplitude"]) * np.sin(float(spec.get("frequency", 1)) * np.pi * t)
        if kind == "hat":
            c = float(spec.get("center", 0.5))
            up = np.where(t <= c, t / c if c > 0 else 0.0, (1.0 - t) / (1.0 - c))
            return float(spec["peak"]) * np.clip(up, 0.0, None)
        raise InvalidInputError(f"unknown curve spec kind {kind!r}")
    vals = np.asarray(spec, dtype=float)
    if vals.shape != t.shape:
        raise InvalidInputError("curve spec array length does not match the grid")
    return np.array(vals)


@dataclass(frozen=True)
class ScenarioSpec:
    n: int
    grid_size: int = 100
    means: tuple = ({"kind": "constant", "value": 0.0},)
    change_locations: tuple = ()
    error_process: str = "iid"
    error_param: float = 0.0  # theta for ma1, rho for ar1
    tau2: object = 1.0  # scalar or curve spec for the innovation variance
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "means", tuple(self.means))
        object.__setattr__(self, "change_locations", tuple(self.change_locations))
        if self.n < 1:
            raise InvalidInputError("n must be >= 1")
        if len(self.means) != len(self.change_locations) + 1:
            raise InvalidInputError("need exactly one mean spec per segment")
        locs = self.change_locations
        if any(not 0.0 < s < 1.0 for s in locs) or any(
            b <= a for a, b in zip(locs, locs[1:])
        ):
            raise InvalidInputError("change locations must be strictly increasing in (0, 1)")
        if self.error_process not in ERROR_PROCESSES:
            raise InvalidInputError(f"error_process must be one of {ERROR_PROCESSES}")
        if self.error_process == "ar1" and not abs(self.error_param) < 1.0:
            raise InvalidInputError("AR(1) coefficient must satisfy |rho| < 1")
        if not np.isfinite(self.error_param):
            raise InvalidInputError("error parameter must be finite")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "grid_size": self.grid_size,
            "means": list(self.means),
            "change_locations": list(self.change_locations),
            "error_process": self.error_process,
            "error_param": self.error_param,
            "tau2": self.tau2,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        return cls(**d)


@dataclass(frozen=True)
class GroundTruth:
    segment_means: tuple  # Curve per segment
    change_locations: tuple
    jump_sizes: tuple
    lrv: Curve  # analytic long-run variance curve
    pointwise_variance: Curve

    @property
    def m(self) -> int:
        return len(self.change_locations)

    def relevant_indices(self, delta: float) -> tuple:
        return (0,) + tuple(
            i for i, jump in enumerate(self.jump_sizes, start=1) if jump > delta
        )


def _innovations(rng, count: int, grid: Grid, tau2_vals: np.ndarray) -> np.ndarray:
    t = grid.points
    k = np.arange(1, N_BASIS + 1)[:, None]
    basis = np.sqrt(2.0) * np.cos(k * np.pi * t[None, :]) / k
    raw_var = (basis**2).sum(axis=0)
    scale = np.sqrt(tau2_vals / raw_var)
    z = rng.standard_normal((count, N_BASIS))
    return (z @ basis) * scale


def generate(spec: ScenarioSpec):
    """Draw one series from the scenario; returns (series, ground truth)."""
    grid = Grid.uniform(spec.grid_size)
    tau2_vals = np.clip(curve_values(spec.tau2, grid) if not isinstance(spec.tau2, (int, float))
                        else np.full(len(grid), float(spec.tau2)), 0.0, None)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.rng_seed)))
    n = spec.n
    if spec.error_process == "iid":
        eps = _innovations(rng, n, grid, tau2_vals)
        lrv_factor, pv_factor = 1.0, 1.0
    elif spec.error_process == "ma1":
        theta = spec.error_param
        eta = _innovations(rng, n + 1, grid, tau2_vals)
        eps = eta[1:] + theta * eta[:-1]
        lrv_factor, pv_factor = (1.0 + theta) ** 2, 1.0 + theta**2
    else:  # ar1
        rho = spec.error_param
        eta = _innovations(rng, n + _AR_BURN_IN, grid, tau2_vals)
        eps = np.empty((n, len(grid)))
        state = np.zeros(len(grid))
        for j in range(n + _AR_BURN_IN):
            state = rho * state + eta[j]
            if j >= _AR_BURN_IN:
                eps[j - _AR_BURN_IN] = state
        lrv_factor = 1.0 / (1.0 - rho) ** 2
        pv_factor = 1.0 / (1.0 - rho**2)

    segments = segments_from_locations(n, spec.change_locations)
    mean_curves = [Curve(curve_values(m, grid), grid) for m in spec.means]
    mean_matrix = np.empty((n, len(grid)))
    for seg, mu in zip(segments, mean_curves):
        mean_matrix[seg.start : seg.end] = mu.values

    x = FunctionalTimeSeries(mean_matrix + eps, grid)
    jumps = tuple(
        sup_norm(b.values - a.values) for a, b in zip(mean_curves, mean_curves[1:])
    )
    truth = GroundTruth(
        segment_means=tuple(mean_curves),
        change_locations=spec.change_locations,
        jump_sizes=jumps,
        lrv=Curve(lrv_factor * tau2_vals, grid),
        pointwise_variance=Curve(pv_factor * tau2_vals, grid),
    )
    return x, truth


@dataclass(frozen=True)
class CoverageReport:
    replications: int
    contained: tuple  # bool per successful replication
    coverage: float
    average_band_width: float
    m_match_rate: float
    relevant_match_rate: float
    mean_location_error: float
    failures: tuple = ()

    def summary_rows(self) -> list:
        return [
            ("replications", self.replications),
            ("coverage", self.coverage),
            ("average_band_width", self.average_band_width),
            ("m_match_rate", self.m_match_rate),
            ("relevant_match_rate", self.relevant_match_rate),
            ("mean_location_error", self.mean_location_error),
            ("failures", len(self.failures)),
        ]


def _derived_seed(*entropy) -> int:
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def run_coverage_study(
    spec: ScenarioSpec,
    pipeline_cfg: PipelineConfig | None = None,
    replications: int = 100,
) -> CoverageReport:
    """Generate -> analyze -> containment check, repeated `replications` times.

    Containment is evaluated against the true segment means of the truly
    relevant segments; a replication whose detected structure differs from the
    truth (wrong number of changes or wrong relevant set) counts as not
    covered.  Per-replication seeds derive from the scenario seed, so the
    aggregate is identical however replications are scheduled.
    """
    if replications < 1:
        raise InvalidInputError("replications must be >= 1")
    pipeline_cfg = pipeline_cfg or PipelineConfig()

    contained, widths, m_ok_list, i_ok_list, loc_errs = [], [], [], [], []
    failures = []
    for rep in range(replications):
        spec_r = replace(spec, rng_seed=_derived_seed(spec.rng_seed, rep, 0))
        cfg_r = replace(pipeline_cfg, rng_seed=_derived_seed(spec.rng_seed, rep, 1))
        try:
            x, truth = generate(spec_r)
            res = analyze(x, cfg_r)
        except Exception as exc:  # recorded, not fatal (unless > 5% fail)
            failures.append(f"replication {rep}: {exc}")
            continue

        true_i = truth.relevant_indices(res.delta)
        m_ok = res.change_points.m == truth.m
        i_ok = m_ok and res.relevant.indices == true_i
        m_ok_list.append(m_ok)
        i_ok_list.append(i_ok)
        if m_ok and truth.m > 0:
            loc_errs.append(
                float(
                    np.mean(
                        np.abs(
                            np.array(res.change_points.locations)
                            - np.array(truth.change_locations)
                        )
                    )
                )
            )
        widths.append(
            float(
                np.mean(
                    [np.mean(b.upper.values - b.lower.values) for b in res.bands.bands]
                )
            )
        )
        if i_ok:
            result = check_containment(
                res.bands, [truth.segment_means[i] for i in true_i]
            )
            contained.append(result.overall)
        else:
            contained.append(False)

    if len(failures) > 0.05 * replications:
        raise InternalInvariantError(
            f"{len(failures)} of {replications} replications failed: {failures[:3]}"
        )
    n_ok = len(contained)
    return CoverageReport(
        replications=replications,
        contained=tuple(contained),
        coverage=float(np.mean(contained)) if n_ok else float("nan"),
        average_band_width=float(np.mean(widths)) if widths else float("nan"),
        m_match_rate=float(np.mean(m_ok_list)) if m_ok_list else float("nan"),
        relevant_match_rate=float(np.mean(i_ok_list)) if i_ok_list else float("nan"),
        mean_location_error=float(np.mean(loc_errs)) if loc_errs else float("nan"),
        failures=tuple(failures),
    )
