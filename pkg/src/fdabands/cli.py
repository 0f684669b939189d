"""Command line front end: ingest cycle data, run the analysis pipeline, and
emit plot-ready tables.

Verbs: ``analyze`` (data -> change points, bands, diagnostics), ``simulate``
(scenario -> dataset + truth), ``coverage`` (scenario -> Monte Carlo coverage
report), ``version``.  Exit codes: 0 success, 2 invalid input or
configuration, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .core import FunctionalTimeSeries, Grid, InternalInvariantError, InvalidInputError
from .lrv import LrvConfig, get_kernel
from .pipeline import AnalysisResult, PipelineConfig, analyze
from .segmentation import RelevantChangeConfig, SegmentationConfig
from .simulate import ScenarioSpec, generate, run_coverage_study

_SIG_DIGITS = ".12g"


def _fmt(x) -> str:
    return format(float(x), _SIG_DIGITS)


# ---------------------------------------------------------------------------
# ingestion


def _sniff_delimiter(sample: str) -> str:
    try:
        return csv.Sniffer().sniff(sample, delimiters=",;\t ").delimiter
    except csv.Error:
        return ","


def _parse_cell(text: str, row: int, col: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise InvalidInputError(
            f"row {row}, column {col}: cannot parse {text!r} as a number"
        ) from None


def ingest(path, grid_size: int = 100) -> FunctionalTimeSeries:
    """Read cycle data and resample every cycle onto the uniform grid.

    Two layouts are accepted: matrix (one row per cycle, columns are equally
    spaced phases) and long (columns cycle_id, phase, value; arbitrary
    per-cycle sampling).  Cycle order is preserved.
    """
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"input file not found: {path}")
    text = path.read_text()
    if not text.strip():
        raise InvalidInputError(f"input file is empty: {path}")
    delimiter = _sniff_delimiter(text[:4096])
    rows = [r for r in csv.reader(text.splitlines(), delimiter=delimiter) if any(c.strip() for c in r)]
    header = [c.strip().lower() for c in rows[0]]
    grid = Grid.uniform(grid_size)
    if "cycle_id" in header:
        return _ingest_long(rows, header, grid)
    return _ingest_matrix(rows, grid)


def _ingest_long(rows, header, grid: Grid) -> FunctionalTimeSeries:
    try:
        ci, pi, vi = header.index("cycle_id"), header.index("phase"), header.index("value")
    except ValueError:
        raise InvalidInputError(
            "long layout needs columns cycle_id, phase, value"
        ) from None
    cycles: dict = {}
    for r, row in enumerate(rows[1:], start=2):
        cid = row[ci].strip()
        phase = _parse_cell(row[pi], r, pi + 1)
        value = _parse_cell(row[vi], r, vi + 1)
        cycles.setdefault(cid, []).append((phase, value))
    curves = []
    for cid, samples in cycles.items():  # insertion order = stride order
        samples.sort(key=lambda pv: pv[0])
        phases = np.array([p for p, _ in samples])
        values = np.array([v for _, v in samples])
        if phases.size < 2:
            raise InvalidInputError(f"cycle {cid!r} has fewer than 2 samples")
        if phases[0] < 0.0 or phases[-1] > 1.0:
            raise InvalidInputError(f"cycle {cid!r} has phases outside [0, 1]")
        if np.any(np.diff(phases) <= 0):
            raise InvalidInputError(f"cycle {cid!r} has duplicate phases")
        curves.append(np.interp(grid.points, phases, values))
    return FunctionalTimeSeries(np.stack(curves), grid)


def _ingest_matrix(rows, grid: Grid) -> FunctionalTimeSeries:
    start = 0
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        start = 1  # header row
        if len(rows) == 1:
            raise InvalidInputError("matrix layout has a header but no data rows") from None
    width = len(rows[start])
    curves = []
    for r, row in enumerate(rows[start:], start=start + 1):
        if len(row) != width:
            raise InvalidInputError(f"row {r} has {len(row)} values, expected {width}")
        values = np.array([_parse_cell(c, r, j + 1) for j, c in enumerate(row)])
        if width == len(grid):
            curves.append(values)
        else:
            curves.append(np.interp(grid.points, np.linspace(0.0, 1.0, width), values))
    return FunctionalTimeSeries(np.stack(curves), grid)


# ---------------------------------------------------------------------------
# run configuration


@dataclass(frozen=True)
class RunConfig:
    input: str
    output_dir: str
    grid_size: int = 100
    alpha: float = 0.1
    beta: float = 0.05
    delta: float | str = "auto"
    block_length: int | str = "auto"
    replications: int = 2000
    seed: int = 0
    kernel: str = "bartlett"
    bandwidth: int | str = "auto"
    xi: float | str = "auto"
    min_segment_length: int | None = None
    max_changes: int = 50
    band_quantile_mode: str = "alpha_half"

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            alpha=self.alpha,
            segmentation=SegmentationConfig(
                threshold=self.xi,
                min_segment_length=self.min_segment_length,
                max_changes=self.max_changes,
            ),
            relevant=RelevantChangeConfig(delta=self.delta, beta=self.beta),
            lrv=LrvConfig(bandwidth=self.bandwidth, kernel=get_kernel(self.kernel)),
            block_length=self.block_length,
            replications=self.replications,
            rng_seed=self.seed,
            band_quantile_mode=self.band_quantile_mode,
        )


# ---------------------------------------------------------------------------
# serialization


def write_changepoints(path, result: AnalysisResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "s_hat", "jump_size", "relevant"])
        for i, (j, s) in enumerate(
            zip(result.change_points.indices, result.change_points.locations), start=1
        ):
            w.writerow([j, _fmt(s), _fmt(result.relevant.all_jumps[i - 1]), int(i in result.relevant.indices)])


def write_bands(path, band_set) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["segment", "t", "lower", "center", "upper"])
        for band in band_set.bands:
            for t, lo, c, up in zip(
                band.center.grid.points,
                band.lower.values,
                band.center.values,
                band.upper.values,
            ):
                w.writerow([band.index, _fmt(t), _fmt(lo), _fmt(c), _fmt(up)])


def read_bands(path) -> dict:
    """Re-read a bands table as {segment index: dict of t/lower/center/upper arrays}."""
    groups: dict = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            g = groups.setdefault(int(row["segment"]), {"t": [], "lower": [], "center": [], "upper": []})
            for key in ("t", "lower", "center", "upper"):
                g[key].append(float(row[key]))
    return {k: {key: np.array(v) for key, v in g.items()} for k, g in groups.items()}


def write_diagnostics(path, result: AnalysisResult) -> None:
    sigma2 = result.lrv.sigma2.values
    entries = dict(result.bands.metadata)
    entries.update(
        {
            "version": __version__,
            "quantile": result.bands.quantile,
            "segmentation_threshold": result.change_points.threshold,
            "num_changes": result.change_points.m,
            "relevant_indices": ",".join(str(i) for i in result.relevant.indices),
            "sigma2_min": _fmt(sigma2.min()),
            "sigma2_median": _fmt(np.median(sigma2)),
            "sigma2_max": _fmt(sigma2.max()),
        }
    )
    with open(path, "w") as fh:
        for key in sorted(entries):
            value = entries[key]
            if isinstance(value, float):
                value = _fmt(value)
            fh.write(f"{key} = {value}\n")


def run_pipeline(cfg: RunConfig) -> AnalysisResult:
    """Ingest, analyze, and write the changepoints/bands/diagnostics tables."""
    x = ingest(cfg.input, cfg.grid_size)
    result = analyze(x, cfg.pipeline_config())
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_changepoints(out / "changepoints.csv", result)
    write_bands(out / "bands.csv", result.bands)
    write_diagnostics(out / "diagnostics.txt", result)
    return result


# ---------------------------------------------------------------------------
# argument parsing


def _auto_or(type_):
    def convert(text):
        return "auto" if text == "auto" else type_(text)

    return convert


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-size", type=int, default=None, help="grid size T (default 100)")
    p.add_argument("--alpha", type=float, default=None, help="band level (default 0.1)")
    p.add_argument("--beta", type=float, default=None, help="relevant-change level (default 0.05)")
    p.add_argument("--delta", type=_auto_or(float), default=None, help="jump threshold or 'auto'")
    p.add_argument("--block-length", type=_auto_or(int), default=None, help="bootstrap block length or 'auto'")
    p.add_argument("--replications", type=int, default=None, help="bootstrap replications (default 2000)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    p.add_argument("--kernel", default=None, help="lag-window kernel: bartlett, parzen, flat_top")
    p.add_argument("--bandwidth", type=_auto_or(int), default=None, help="lag-window bandwidth or 'auto'")
    p.add_argument("--xi", type=_auto_or(float), default=None, help="segmentation threshold or 'auto'")
    p.add_argument("--min-segment-length", type=int, default=None)
    p.add_argument("--max-changes", type=int, default=None)
    p.add_argument("--band-quantile-mode", choices=["alpha", "alpha_half"], default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdabands", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", help="segment a series and emit confidence bands")
    p_an.add_argument("--input", default=None, help="cycle data (matrix or long layout)")
    p_an.add_argument("--output-dir", default=None)
    p_an.add_argument("--config", default=None, help="JSON file presetting any flag; flags override")
    _add_pipeline_flags(p_an)

    p_sim = sub.add_parser("simulate", help="draw a synthetic dataset with known truth")
    p_sim.add_argument("--spec", required=True, help="scenario spec (JSON)")
    p_sim.add_argument("--output-dir", required=True)

    p_cov = sub.add_parser("coverage", help="Monte Carlo coverage study")
    p_cov.add_argument("--spec", required=True, help="scenario spec (JSON)")
    p_cov.add_argument("--study-replications", type=int, default=100)
    p_cov.add_argument("--output-dir", default=None)
    _add_pipeline_flags(p_cov)

    sub.add_parser("version", help="print the library version")
    return parser


def _load_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"cannot parse {path}: {exc}") from None


def _merge_run_config(args) -> RunConfig:
    settings = {}
    if args.config:
        file_settings = _load_json(args.config)
        unknown = set(file_settings) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        settings.update(file_settings)
    flag_map = {
        "input": args.input,
        "output_dir": args.output_dir,
        "grid_size": args.grid_size,
        "alpha": args.alpha,
        "beta": args.beta,
        "delta": args.delta,
        "block_length": args.block_length,
        "replications": args.replications,
        "seed": args.seed,
        "kernel": args.kernel,
        "bandwidth": args.bandwidth,
        "xi": args.xi,
        "min_segment_length": args.min_segment_length,
        "max_changes": args.max_changes,
        "band_quantile_mode": args.band_quantile_mode,
    }
    settings.update({k: v for k, v in flag_map.items() if v is not None})
    if not settings.get("input"):
        raise InvalidInputError("no input file given (flag --input or config key 'input')")
    if not settings.get("output_dir"):
        raise InvalidInputError("no output directory given (--output-dir)")
    return RunConfig(**settings)


def _pipeline_config_from_args(args) -> PipelineConfig:
    defaults = RunConfig(input="-", output_dir="-")
    kwargs = {}
    for field_name in (
        "alpha", "beta", "delta", "block_length", "replications", "seed",
        "kernel", "bandwidth", "xi", "min_segment_length", "max_changes",
        "band_quantile_mode",
    ):
        value = getattr(args, field_name)
        kwargs[field_name] = getattr(defaults, field_name) if value is None else value
    return RunConfig(input="-", output_dir="-", **kwargs).pipeline_config()


def _cmd_analyze(args) -> int:
    cfg = _merge_run_config(args)
    result = run_pipeline(cfg)
    print(
        f"n={result.bands.metadata['n']} changes={result.change_points.m} "
        f"relevant={len(result.relevant.indices)} quantile={_fmt(result.bands.quantile)} "
        f"delta={_fmt(result.delta)}"
    )
    print(f"wrote changepoints.csv, bands.csv, diagnostics.txt to {cfg.output_dir}")
    return 0


def _cmd_simulate(args) -> int:
    spec = ScenarioSpec.from_dict(_load_json(args.spec))
    x, truth = generate(spec)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "dataset.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        for row in x.values:
            w.writerow([_fmt(v) for v in row])
    truth_doc = {
        "spec": spec.to_dict(),
        "grid": [float(t) for t in x.grid.points],
        "change_locations": list(truth.change_locations),
        "jump_sizes": list(truth.jump_sizes),
        "segment_means": [[float(v) for v in c.values] for c in truth.segment_means],
        "lrv": [float(v) for v in truth.lrv.values],
        "pointwise_variance": [float(v) for v in truth.pointwise_variance.values],
    }
    (out / "truth.json").write_text(json.dumps(truth_doc, indent=2))
    print(f"wrote dataset.csv ({x.n} cycles) and truth.json to {out}")
    return 0


def _cmd_coverage(args) -> int:
    spec = ScenarioSpec.from_dict(_load_json(args.spec))
    cfg = _pipeline_config_from_args(args)
    report = run_coverage_study(spec, cfg, replications=args.study_replications)
    rows = report.summary_rows()
    for key, value in rows:
        print(f"{key} = {_fmt(value) if isinstance(value, float) else value}")
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "coverage.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["metric", "value"])
            for key, value in rows:
                w.writerow([key, _fmt(value) if isinstance(value, float) else value])
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "coverage":
            return _cmd_coverage(args)
        if args.command == "version":
            print(__version__)
            return 0
        raise InternalInvariantError(f"unhandled command {args.command!r}")
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InternalInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
