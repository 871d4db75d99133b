"""Inference pipeline: filter voxels, shift them onto the curve, thin the
point cloud, order it with a 1-D Isomap embedding, and resample.

Also provides the two raster-limited reference detectors (curve segmentation
masks and distance heatmaps) used for comparison; they share the NMS,
ordering and resampling stages and differ only in how the point cloud is
formed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import PointCloud, Polyline, ScalarField, VectorField, resample_polyline
from .errors import (
    DisconnectedGraphWarning,
    GridMismatchError,
    NoCurveDetectedError,
    PowerIterationError,
)

POWER_ITERATION_CAP = 10_000
POWER_ITERATION_TOL = 1e-9


@dataclass(frozen=True)
class DetectorConfig:
    """Inference parameters.

    closeness_threshold: minimum predicted closeness for a voxel to vote.
    field_radius: maximum predicted vector norm (mm) for a voxel to vote.
    nms_radius: suppression radius (mm) for point-cloud thinning.
    isomap_neighbors: k of the nearest-neighbor graph used for ordering.
    resample_step: arc-length step (mm) of the final curve.
    """

    closeness_threshold: float = 0.5
    field_radius: float = 5.0
    nms_radius: float = 2.0
    isomap_neighbors: int = 6
    resample_step: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.closeness_threshold <= 1.0):
            raise ValueError(f"closeness threshold must be in [0, 1], got {self.closeness_threshold!r}")
        if not self.field_radius > 0:
            raise ValueError(f"field radius must be > 0, got {self.field_radius!r}")
        if not self.nms_radius > 0:
            raise ValueError(f"NMS radius must be > 0, got {self.nms_radius!r}")
        if int(self.isomap_neighbors) < 2:
            raise ValueError(f"isomap neighbor count must be >= 2, got {self.isomap_neighbors!r}")
        if not self.resample_step > 0:
            raise ValueError(f"resample step must be > 0, got {self.resample_step!r}")


def extract_point_cloud(field: VectorField, closeness: ScalarField,
                        config: DetectorConfig) -> PointCloud:
    """Voxels passing both thresholds vote for the point their vector hits.

    Confidence is the negated vector norm, so voxels that believe they are
    close to the curve rank first.  Points come out in raster-scan order of
    their source voxels.
    """
    if field.grid != closeness.grid:
        raise GridMismatchError("field and closeness live on different grids")
    norms = field.norms().reshape(-1)
    close = closeness.values.reshape(-1)
    mask = (close >= config.closeness_threshold) & (norms <= config.field_radius)
    idx = np.nonzero(mask)[0]
    centers = field.grid.voxel_centers()[idx]
    vectors = field.vectors.reshape(-1, 3)[idx]
    return PointCloud(points=centers + vectors, confidence=-norms[idx])


def nms(cloud: PointCloud, radius: float) -> PointCloud:
    """Greedy non-maximum suppression by confidence.

    Repeatedly keeps the highest-confidence remaining point and discards all
    points within ``radius`` (inclusive) of it; remaining pairwise distances
    are therefore all > radius.  Confidence ties break by ascending
    lexicographic point order.
    """
    if not radius > 0:
        raise ValueError(f"NMS radius must be > 0, got {radius!r}")
    if len(cloud) == 0:
        return cloud
    keep = kernels.nms_keep(cloud.points, cloud.confidence, float(radius))
    return PointCloud(points=cloud.points[keep], confidence=cloud.confidence[keep])


def _knn_graph_csr(points: np.ndarray, k: int):
    """Symmetric k-nearest-neighbor graph with Euclidean weights (CSR).

    Distance ties rank by lexicographic point order so the graph does not
    depend on input permutation.  Disconnected graphs are bridged by the
    shortest inter-component links (a minimum spanning structure over the
    components) and flagged with DisconnectedGraphWarning.
    """
    n = points.shape[0]
    k = min(int(k), n - 1)
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))

    neighbor_sets = [set() for _ in range(n)]
    for i in range(n):
        order = np.lexsort((points[:, 2], points[:, 1], points[:, 0], dist[i]))
        picked = 0
        for j in order:
            if j == i:
                continue
            neighbor_sets[i].add(int(j))
            picked += 1
            if picked == k:
                break
    edges = set()
    for i in range(n):
        for j in neighbor_sets[i]:
            edges.add((min(i, j), max(i, j)))

    bridged = False
    labels = _components(n, edges)
    ncomp = int(labels.max()) + 1
    if ncomp > 1:
        bridged = True
        for i, j in _bridge_edges(dist, labels, ncomp):
            edges.add((min(i, j), max(i, j)))

    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = []
    weights = []
    for i in range(n):
        for j in sorted(adj[i]):
            indices.append(j)
            weights.append(dist[i, j])
        indptr[i + 1] = len(indices)
    return indptr, np.asarray(indices, dtype=np.int64), np.asarray(weights), bridged


def _components(n: int, edges) -> np.ndarray:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = {}
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        r = find(i)
        labels[i] = roots.setdefault(r, len(roots))
    return labels


def _bridge_edges(dist: np.ndarray, labels: np.ndarray, ncomp: int):
    """Minimum spanning structure over components; yields point-index pairs."""
    comp_members = [np.nonzero(labels == c)[0] for c in range(ncomp)]
    best = np.full((ncomp, ncomp), np.inf)
    best_pair = {}
    for a in range(ncomp):
        for b in range(a + 1, ncomp):
            sub = dist[np.ix_(comp_members[a], comp_members[b])]
            flat = int(np.argmin(sub))
            ia, ib = divmod(flat, sub.shape[1])
            best[a, b] = best[b, a] = sub[ia, ib]
            best_pair[(a, b)] = (int(comp_members[a][ia]), int(comp_members[b][ib]))
    # Prim over components starting from component 0.
    in_tree = {0}
    edges = []
    while len(in_tree) < ncomp:
        cand = min(
            ((a, b) for a in in_tree for b in range(ncomp) if b not in in_tree),
            key=lambda ab: (best[ab[0], ab[1]], ab[0], ab[1]),
        )
        a, b = cand
        edges.append(best_pair[(min(a, b), max(a, b))])
        in_tree.add(b)
    return edges


def _embed_1d(geodesic: np.ndarray) -> np.ndarray:
    """Classical 1-D MDS of a distance matrix via power iteration.

    Double-centers the squared distances and extracts the dominant
    eigenvector.  The start vector is a centered index ramp: it is
    deterministic and, unlike the constant vector, not annihilated by the
    centering.
    """
    n = geodesic.shape[0]
    d2 = geodesic * geodesic
    row = d2.mean(axis=1, keepdims=True)
    col = d2.mean(axis=0, keepdims=True)
    grand = d2.mean()
    b = -0.5 * (d2 - row - col + grand)

    v = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
    v /= np.linalg.norm(v)
    for _ in range(POWER_ITERATION_CAP):
        w = b @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            raise PowerIterationError("power iteration collapsed to the zero vector")
        w /= norm
        if w @ v < 0.0:
            w = -w
        delta = np.linalg.norm(w - v)
        v = w
        if delta <= POWER_ITERATION_TOL:
            return v
    raise PowerIterationError(
        f"power iteration did not converge within {POWER_ITERATION_CAP} iterations"
    )


def order_points_isomap(cloud: PointCloud, neighbors: int = 6) -> Polyline:
    """Order an unordered on-curve point cloud by its 1-D Isomap embedding.

    Builds a symmetric kNN graph, takes all-pairs geodesic distances, embeds
    them to one dimension by classical MDS, and sorts points by the embedding
    coordinate.  Orientation is canonical: the first output point compares
    lexicographically <= the last.
    """
    if len(cloud) < 2:
        raise NoCurveDetectedError(
            f"need at least 2 points to order a curve, got {len(cloud)}"
        )
    points = cloud.points
    indptr, indices, weights, bridged = _knn_graph_csr(points, neighbors)
    if bridged:
        warnings.warn(
            "neighbor graph was disconnected; components bridged by their "
            "shortest links",
            DisconnectedGraphWarning,
            stacklevel=2,
        )
    geodesic = kernels.allpairs_shortest_path(indptr, indices, weights, len(cloud))
    coord = _embed_1d(geodesic)
    order = np.lexsort((points[:, 2], points[:, 1], points[:, 0], coord))
    ordered = points[order]
    first, last = tuple(ordered[0]), tuple(ordered[-1])
    if first > last:
        ordered = ordered[::-1]
    return Polyline(ordered)


def detect_curve(field: VectorField, closeness: ScalarField,
                 config: DetectorConfig = DetectorConfig()) -> Polyline:
    """Full pipeline: extract -> NMS -> Isomap ordering -> resampling."""
    cloud = extract_point_cloud(field, closeness, config)
    if len(cloud) < 2:
        raise NoCurveDetectedError(
            "no curve detected: fewer than 2 voxels passed the filters"
        )
    thinned = nms(cloud, config.nms_radius)
    if len(thinned) < 2:
        raise NoCurveDetectedError(
            "no curve detected: fewer than 2 points survived suppression"
        )
    ordered = order_points_isomap(thinned, config.isomap_neighbors)
    return resample_polyline(ordered, config.resample_step)


def baseline_segmentation(mask: ScalarField,
                          config: DetectorConfig = DetectorConfig()) -> Polyline:
    """Curve from a binary voxel mask: centers of marked voxels, uniform
    confidence, then the shared NMS/ordering/resampling stages."""
    if not mask.is_binary():
        raise ValueError("segmentation mask must be binary {0, 1}")
    idx = np.nonzero(mask.values.reshape(-1) == 1.0)[0]
    if idx.size < 2:
        raise NoCurveDetectedError("no curve detected: mask marks fewer than 2 voxels")
    points = mask.grid.voxel_centers()[idx]
    cloud = PointCloud(points=points, confidence=np.zeros(idx.size))
    thinned = nms(cloud, config.nms_radius)
    if len(thinned) < 2:
        raise NoCurveDetectedError("no curve detected: fewer than 2 points after suppression")
    ordered = order_points_isomap(thinned, config.isomap_neighbors)
    return resample_polyline(ordered, config.resample_step)


def baseline_heatmap(distances: ScalarField, closeness: ScalarField, tau: float,
                     config: DetectorConfig = DetectorConfig()) -> Polyline:
    """Curve from a distance heatmap: voxels inside the closeness region with
    distance <= tau vote at their centers with confidence -distance."""
    if not tau > 0:
        raise ValueError(f"heatmap threshold tau must be > 0, got {tau!r}")
    if distances.grid != closeness.grid:
        raise GridMismatchError("distances and closeness live on different grids")
    d = distances.values.reshape(-1)
    close = closeness.values.reshape(-1)
    mask = (close >= config.closeness_threshold) & (d <= tau)
    idx = np.nonzero(mask)[0]
    if idx.size < 2:
        raise NoCurveDetectedError("no curve detected: fewer than 2 voxels pass the heatmap threshold")
    points = distances.grid.voxel_centers()[idx]
    cloud = PointCloud(points=points, confidence=-d[idx])
    thinned = nms(cloud, config.nms_radius)
    if len(thinned) < 2:
        raise NoCurveDetectedError("no curve detected: fewer than 2 points after suppression")
    ordered = order_points_isomap(thinned, config.isomap_neighbors)
    return resample_polyline(ordered, config.resample_step)
