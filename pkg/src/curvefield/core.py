"""Domain types and elementary polyline geometry.

Conventions used everywhere in this package:

* all coordinates, spacings and distances are millimeters, never voxel units;
* a voxel index maps to the voxel *center*; the grid origin is the center of
  voxel ``(0, 0, 0)``;
* arrays are float64 and read-only after construction, so every type here is
  safe to share across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def as_point(value) -> np.ndarray:
    """Coerce to a read-write (3,) float64 vector, validating finiteness."""
    p = np.asarray(value, dtype=np.float64).reshape(3).copy()
    if not np.all(np.isfinite(p)):
        raise ValueError(f"point has non-finite components: {p!r}")
    return p


@dataclass(frozen=True)
class Spacing:
    """Physical voxel size in millimeters along each axis."""

    sx: float
    sy: float
    sz: float

    def __post_init__(self):
        for name, v in (("sx", self.sx), ("sy", self.sy), ("sz", self.sz)):
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"spacing {name}={v!r} must be finite and > 0")

    @classmethod
    def isotropic(cls, s: float) -> "Spacing":
        return cls(float(s), float(s), float(s))

    def as_array(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz], dtype=np.float64)


@dataclass(frozen=True)
class Grid3:
    """Regular 3-D voxel lattice with anisotropic spacing and a world origin."""

    shape: tuple
    spacing: Spacing
    origin: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        if len(shape) != 3 or any(n < 1 for n in shape):
            raise ValueError(f"grid shape must be three counts >= 1, got {self.shape!r}")
        origin = tuple(float(v) for v in self.origin)
        if len(origin) != 3 or not all(np.isfinite(origin)):
            raise ValueError(f"grid origin must be a finite 3-vector, got {self.origin!r}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "origin", origin)

    @property
    def num_voxels(self) -> int:
        nx, ny, nz = self.shape
        return nx * ny * nz

    def axis_coordinates(self, axis: int) -> np.ndarray:
        """World coordinates of all voxel centers along one axis."""
        s = self.spacing.as_array()[axis]
        return self.origin[axis] + np.arange(self.shape[axis], dtype=np.float64) * s

    def voxel_centers(self) -> np.ndarray:
        """All voxel centers as an (N, 3) array in raster-scan (C) order."""
        cx, cy, cz = (self.axis_coordinates(a) for a in range(3))
        x, y, z = np.meshgrid(cx, cy, cz, indexing="ij")
        return np.ascontiguousarray(
            np.stack([x, y, z], axis=-1).reshape(-1, 3)
        )

    def world_bounds(self) -> tuple:
        """(lo, hi) world coordinates of the first and last voxel centers."""
        lo = np.array(self.origin, dtype=np.float64)
        hi = lo + (np.array(self.shape, dtype=np.float64) - 1.0) * self.spacing.as_array()
        return lo, hi


def world_coordinates(grid: Grid3, index) -> np.ndarray:
    """World (mm) position of a voxel center.

    Raises IndexError if any index component is outside the grid.
    """
    idx = tuple(int(i) for i in index)
    if len(idx) != 3:
        raise IndexError(f"voxel index must have 3 components, got {index!r}")
    for i, n in zip(idx, grid.shape):
        if i < 0 or i >= n:
            raise IndexError(f"voxel index {idx!r} outside grid shape {grid.shape!r}")
    s = grid.spacing
    return np.array(
        [
            grid.origin[0] + idx[0] * s.sx,
            grid.origin[1] + idx[1] * s.sy,
            grid.origin[2] + idx[2] * s.sz,
        ],
        dtype=np.float64,
    )


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered sequence of 3-D points (mm) with positive-length segments."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"polyline points must be (M, 3), got {pts.shape!r}")
        if pts.shape[0] < 2:
            raise ValueError("polyline needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("polyline points must be finite")
        pts = np.ascontiguousarray(pts.copy())
        seg = np.diff(pts, axis=0)
        lengths = np.sqrt((seg * seg).sum(axis=1))
        if np.any(lengths <= 0.0):
            raise ValueError("consecutive polyline points must be distinct")
        object.__setattr__(self, "points", _freeze(pts))

    @cached_property
    def segment_lengths(self) -> np.ndarray:
        seg = np.diff(self.points, axis=0)
        return _freeze(np.sqrt((seg * seg).sum(axis=1)))

    @cached_property
    def arc_lengths(self) -> np.ndarray:
        """Cumulative arc length at each vertex, starting at 0."""
        return _freeze(np.concatenate([[0.0], np.cumsum(self.segment_lengths)]))

    @property
    def total_length(self) -> float:
        return float(self.arc_lengths[-1])

    @property
    def num_segments(self) -> int:
        return self.points.shape[0] - 1

    def point_at_arc_length(self, s: float) -> np.ndarray:
        """Point on the polyline at arc-length position ``s`` (clamped)."""
        cum = self.arc_lengths
        s = min(max(float(s), 0.0), self.total_length)
        j = int(np.searchsorted(cum, s, side="right")) - 1
        j = min(max(j, 0), self.num_segments - 1)
        seg_len = self.segment_lengths[j]
        local = (s - cum[j]) / seg_len
        a = self.points[j]
        return a + local * (self.points[j + 1] - a)


@dataclass(frozen=True, eq=False)
class VectorField:
    """One 3-vector (mm) per voxel, e.g. an attraction field."""

    grid: Grid3
    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        expected = (*self.grid.shape, 3)
        if v.shape != expected:
            raise ValueError(f"vector array shape {v.shape!r} != grid shape {expected!r}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vector field has non-finite components")
        object.__setattr__(self, "vectors", _freeze(np.ascontiguousarray(v.copy())))

    def norms(self) -> np.ndarray:
        """Per-voxel Euclidean norm, computed as sqrt(x*x + y*y + z*z)."""
        x = self.vectors[..., 0]
        y = self.vectors[..., 1]
        z = self.vectors[..., 2]
        return np.sqrt(x * x + y * y + z * z)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One scalar per voxel, e.g. a closeness map, heatmap or mask."""

    grid: Grid3
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ValueError(f"value array shape {v.shape!r} != grid shape {self.grid.shape!r}")
        if not np.all(np.isfinite(v)):
            raise ValueError("scalar field has non-finite values")
        object.__setattr__(self, "values", _freeze(np.ascontiguousarray(v.copy())))

    def is_binary(self) -> bool:
        return bool(np.all((self.values == 0.0) | (self.values == 1.0)))


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Unordered 3-D points (mm) with one confidence value per point."""

    points: np.ndarray
    confidence: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        conf = np.asarray(self.confidence, dtype=np.float64).reshape(-1)
        if pts.shape[0] != conf.shape[0]:
            raise ValueError(
                f"points ({pts.shape[0]}) and confidence ({conf.shape[0]}) lengths differ"
            )
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(conf))):
            raise ValueError("point cloud must be finite")
        object.__setattr__(self, "points", _freeze(np.ascontiguousarray(pts.copy())))
        object.__setattr__(self, "confidence", _freeze(conf.copy()))

    def __len__(self) -> int:
        return self.points.shape[0]


# Tolerance (mm) below which a trailing arc-length remainder is treated as an
# exact multiple of the resampling step.
_ARC_TOL = 1e-9


def resample_polyline(curve: Polyline, step: float) -> Polyline:
    """Resample at arc-length positions 0, step, 2*step, ... plus the endpoint.

    The first and last output points equal the input endpoints exactly.
    """
    step = float(step)
    if not (np.isfinite(step) and step > 0):
        raise ValueError(f"resampling step must be > 0, got {step!r}")
    total = curve.total_length
    k_max = int(np.floor((total + _ARC_TOL) / step))
    targets = np.arange(k_max + 1, dtype=np.float64) * step
    out = np.empty((len(targets), 3), dtype=np.float64)
    for i, s in enumerate(targets):
        out[i] = curve.point_at_arc_length(s)
    remainder = total - k_max * step
    if remainder > _ARC_TOL:
        out = np.vstack([out, curve.points[-1]])
    else:
        out[-1] = curve.points[-1]
    out[0] = curve.points[0]
    return Polyline(out)
