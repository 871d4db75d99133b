"""Exact ground-truth attraction fields and closeness maps from a polyline.

The stored vector at voxel ``p`` is the displacement from the voxel center to
its nearest point on the curve.  Where several segments are equidistant
(within 1e-9 mm) the projection with the smallest segment index wins, so the
field is single-valued and deterministic regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Grid3, Polyline, ScalarField, VectorField, as_point


@dataclass(frozen=True)
class Projection:
    """Nearest point on a polyline: location, distance and source segment."""

    point: np.ndarray
    distance: float
    segment_index: int


def project_to_polyline(q, curve: Polyline, method: str = "indexed") -> Projection:
    """Globally nearest point of the curve to ``q`` (mm)."""
    query = as_point(q).reshape(1, 3)
    disp, dist, seg, _ = kernels.project_points(query, curve.points, method=method)
    return Projection(point=query[0] + disp[0], distance=float(dist[0]),
                      segment_index=int(seg[0]))


def project_points_to_polyline(queries, curve: Polyline, method: str = "indexed"):
    """Vectorized nearest-point query.

    Returns ``(points[N,3], distances[N], segment_indices[N])``.
    """
    q = np.ascontiguousarray(np.asarray(queries, dtype=np.float64).reshape(-1, 3))
    disp, dist, seg, _ = kernels.project_points(q, curve.points, method=method)
    return q + disp, dist, seg


def attraction_field(grid: Grid3, curve: Polyline, method: str = "indexed") -> VectorField:
    """Attraction field of ``curve`` sampled at every voxel center.

    ``method='brute'`` forces the all-segments scan used as the exactness
    oracle; the default indexed path is bitwise identical to it.
    """
    centers = grid.voxel_centers()
    disp, _, _, _ = kernels.project_points(centers, curve.points, method=method)
    return VectorField(grid=grid, vectors=disp.reshape(*grid.shape, 3))


def closeness_map(field: VectorField, closeness_radius: float) -> ScalarField:
    """Binary map: 1 where the field norm is <= the radius (inclusive)."""
    r = float(closeness_radius)
    if not (np.isfinite(r) and r > 0):
        raise ValueError(f"closeness radius must be > 0, got {closeness_radius!r}")
    values = (field.norms() <= r).astype(np.float64)
    return ScalarField(grid=field.grid, values=values)


def distance_map(field: VectorField) -> ScalarField:
    """Per-voxel Euclidean norm of the field (distance to the curve)."""
    return ScalarField(grid=field.grid, values=field.norms())
