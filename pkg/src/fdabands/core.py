"""Core data model: grids, curves, functional time series, segments.

All types are immutable after construction (backing arrays are marked
read-only) and safe to share across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidInputError(ValueError):
    """Raised when user-supplied data or configuration is unusable."""


class InternalInvariantError(RuntimeError):
    """Raised when an internal consistency check fails (a bug, not bad input)."""


def _frozen_array(values, dtype=float) -> np.ndarray:
    a = np.array(values, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Shared sample locations in [0, 1], strictly increasing, length >= 2."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise InvalidInputError("grid needs at least 2 one-dimensional points")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("grid points must be finite")
        if pts[0] < 0.0 or pts[-1] > 1.0 or np.any(np.diff(pts) <= 0):
            raise InvalidInputError("grid points must be strictly increasing within [0, 1]")
        object.__setattr__(self, "points", _frozen_array(pts))

    @classmethod
    def uniform(cls, size: int = 100) -> "Grid":
        """Uniform grid t_k = k/(size-1), k = 0..size-1."""
        if size < 2:
            raise InvalidInputError("uniform grid needs size >= 2")
        return cls(np.linspace(0.0, 1.0, size))

    def __len__(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.points.size, float(self.points[0]), float(self.points[-1])))


@dataclass(frozen=True, eq=False)
class Curve:
    """One function sampled on a grid; values share the curve's units."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise InvalidInputError("curve values must be one-dimensional")
        if vals.size != len(self.grid):
            raise InvalidInputError(
                f"curve has {vals.size} values but grid has {len(self.grid)} points"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("curve values must be finite")
        object.__setattr__(self, "values", _frozen_array(vals))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class FunctionalTimeSeries:
    """n curves on one shared grid, stored row-wise as an (n, T) matrix."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise InvalidInputError("series values must be an (n, T) matrix")
        if vals.shape[0] < 1:
            raise InvalidInputError("series needs at least one curve")
        if vals.shape[1] != len(self.grid):
            raise InvalidInputError(
                f"series has {vals.shape[1]} columns but grid has {len(self.grid)} points"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("series values must be finite")
        object.__setattr__(self, "values", _frozen_array(vals))

    @classmethod
    def from_curves(cls, curves) -> "FunctionalTimeSeries":
        curves = list(curves)
        if not curves:
            raise InvalidInputError("series needs at least one curve")
        grid = curves[0].grid
        for c in curves[1:]:
            if c.grid != grid:
                raise InvalidInputError("all curves must share the same grid")
        return cls(np.stack([c.values for c in curves]), grid)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def curve(self, j: int) -> Curve:
        return Curve(self.values[j], self.grid)

    @property
    def curves(self) -> list:
        return [self.curve(j) for j in range(self.n)]


@dataclass(frozen=True)
class Segment:
    """Half-open index range [start, end) with optional rescaled bounds."""

    start: int
    end: int
    bounds: tuple | None = None  # (s_i, s_{i+1}) in [0, 1]

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise InvalidInputError(f"segment [{self.start}, {self.end}) is empty or negative")

    @property
    def length(self) -> int:
        return self.end - self.start

    def rescaled(self, n: int) -> tuple:
        if self.bounds is not None:
            return self.bounds
        return (self.start / n, self.end / n)


def sup_norm(c) -> float:
    """Maximum absolute value over the grid (the discrete sup-norm)."""
    vals = c.values if isinstance(c, Curve) else np.asarray(c, dtype=float)
    if vals.size == 0:
        raise InvalidInputError("sup_norm of an empty curve is undefined")
    return float(np.max(np.abs(vals)))


def segment_mean(x: FunctionalTimeSeries, seg: Segment) -> Curve:
    """Pointwise mean of the curves with indices in [seg.start, seg.end)."""
    if seg.end > x.n:
        raise InvalidInputError(f"segment [{seg.start}, {seg.end}) exceeds series length {x.n}")
    return Curve(x.values[seg.start : seg.end].mean(axis=0), x.grid)


def segments_from_locations(n: int, locations) -> list:
    """Partition [0, n) at indices floor(n * s) for each rescaled location s.

    Boundaries follow the half-open convention [floor(n*s_i), floor(n*s_{i+1})).
    """
    locations = list(locations)
    # the epsilon keeps floor(n * (j/n)) == j despite float rounding
    cuts = [0] + [int(np.floor(n * s + 1e-9)) for s in locations] + [n]
    bounds = [0.0] + [float(s) for s in locations] + [1.0]
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise InvalidInputError(f"locations {locations} induce an empty segment for n={n}")
    return [
        Segment(a, b, bounds=(sa, sb))
        for a, b, sa, sb in zip(cuts, cuts[1:], bounds, bounds[1:])
    ]
