"""Pure-numpy implementations of the hot kernels.

Semantics contract shared with the compiled backend (``_kernels.pyx``): the
per-(query, segment) arithmetic below is the canonical expression tree; both
backends evaluate it with the same operation order so results are bitwise
identical.  Candidate pruning in the indexed path only ever skips segments
that provably cannot win or tie, so indexed results equal the all-segments
scan bitwise as well.
"""

from __future__ import annotations

import heapq

import numpy as np

# Distances within this tolerance (mm) count as ties; ties are resolved in
# favor of the smaller segment index.
TIE_TOL = 1e-9

_QUERY_CHUNK = 8192


def _segment_arrays(pts: np.ndarray):
    a = pts[:-1]
    e = pts[1:] - pts[:-1]
    ex, ey, ez = e[:, 0], e[:, 1], e[:, 2]
    inv = 1.0 / (ex * ex + ey * ey + ez * ez)
    return a, e, inv


def project_points_brute(queries: np.ndarray, pts: np.ndarray):
    """Project each query onto the polyline by scanning every segment.

    Returns (disp[N,3], dist[N], seg[N], t[N]) where disp is the displacement
    from the query to its nearest curve point.
    """
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    a, e, inv = _segment_arrays(np.asarray(pts, dtype=np.float64))
    n = queries.shape[0]
    qx, qy, qz = queries[:, 0], queries[:, 1], queries[:, 2]

    best_d = np.full(n, np.inf)
    best_seg = np.full(n, -1, dtype=np.int64)
    best_t = np.zeros(n)
    disp = np.zeros((n, 3))

    for s in range(a.shape[0]):
        t, fx, fy, fz, dist = _eval_segment(
            qx, qy, qz,
            a[s, 0], a[s, 1], a[s, 2],
            e[s, 0], e[s, 1], e[s, 2],
            inv[s],
        )
        better = dist < best_d - TIE_TOL
        if np.any(better):
            best_d[better] = dist[better]
            best_seg[better] = s
            best_t[better] = t[better]
            disp[better, 0] = fx[better]
            disp[better, 1] = fy[better]
            disp[better, 2] = fz[better]
    return disp, best_d, best_seg, best_t


def _eval_segment(qx, qy, qz, ax, ay, az, ex, ey, ez, inv):
    # Canonical expression tree; mirrored scalar-for-scalar in the compiled
    # backend.  Computes the displacement f = projection - query directly so
    # the result is exactly translation-invariant (no absolute coordinates
    # are materialized before the final subtraction).
    dx = qx - ax
    dy = qy - ay
    dz = qz - az
    t = (dx * ex + dy * ey + dz * ez) * inv
    t = np.clip(t, 0.0, 1.0)
    fx = t * ex - dx
    fy = t * ey - dy
    fz = t * ez - dz
    dist = np.sqrt(fx * fx + fy * fy + fz * fz)
    return t, fx, fy, fz, dist


def _vertex_upper_bounds(queries: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Distance to the nearest of ~128 anchor vertices (upper bound on the
    distance to the polyline; thinning only loosens the bound)."""
    stride = max(1, pts.shape[0] // 128)
    anchors = np.vstack([pts[::stride], pts[-1]])
    n = queries.shape[0]
    u = np.empty(n)
    for start in range(0, n, _QUERY_CHUNK):
        chunk = queries[start : start + _QUERY_CHUNK]
        diff = chunk[:, None, :] - anchors[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        u[start : start + _QUERY_CHUNK] = np.sqrt(d2.min(axis=1))
    return u


def project_points_indexed(queries: np.ndarray, pts: np.ndarray):
    """Accelerated exact projection: per-segment AABB culling against a
    nearest-vertex upper bound.

    Only segments whose box lower bound exceeds ``min(upper, best) + TIE_TOL``
    are skipped, so the surviving update sequence matches the brute scan.
    """
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    pts = np.asarray(pts, dtype=np.float64)
    a, e, inv = _segment_arrays(pts)
    n = queries.shape[0]
    qx, qy, qz = queries[:, 0], queries[:, 1], queries[:, 2]

    lo = np.minimum(pts[:-1], pts[1:])
    hi = np.maximum(pts[:-1], pts[1:])

    upper = _vertex_upper_bounds(queries, pts)

    best_d = np.full(n, np.inf)
    best_seg = np.full(n, -1, dtype=np.int64)
    best_t = np.zeros(n)
    disp = np.zeros((n, 3))

    for s in range(a.shape[0]):
        bx = np.maximum(np.maximum(lo[s, 0] - qx, qx - hi[s, 0]), 0.0)
        by = np.maximum(np.maximum(lo[s, 1] - qy, qy - hi[s, 1]), 0.0)
        bz = np.maximum(np.maximum(lo[s, 2] - qz, qz - hi[s, 2]), 0.0)
        lower = np.sqrt(bx * bx + by * by + bz * bz)
        cand = lower <= np.minimum(upper, best_d) + TIE_TOL
        idx = np.nonzero(cand)[0]
        if idx.size == 0:
            continue
        t, fx, fy, fz, dist = _eval_segment(
            qx[idx], qy[idx], qz[idx],
            a[s, 0], a[s, 1], a[s, 2],
            e[s, 0], e[s, 1], e[s, 2],
            inv[s],
        )
        better = dist < best_d[idx] - TIE_TOL
        if np.any(better):
            rows = idx[better]
            best_d[rows] = dist[better]
            best_seg[rows] = s
            best_t[rows] = t[better]
            disp[rows, 0] = fx[better]
            disp[rows, 1] = fy[better]
            disp[rows, 2] = fz[better]
    return disp, best_d, best_seg, best_t


def nms_suppress(points: np.ndarray, radius: float, order: np.ndarray) -> np.ndarray:
    """Greedy suppression of ``points`` visited in ``order``.

    Returns kept original indices in selection order.  A kept point removes
    every not-yet-visited point within Euclidean distance <= radius
    (inclusive), itself included.
    """
    points = np.asarray(points, dtype=np.float64)
    order = np.asarray(order, dtype=np.int64)
    n = order.shape[0]
    pts_o = points[order]
    r2 = float(radius) * float(radius)
    alive = np.ones(n, dtype=bool)
    keep = []
    for pos in range(n):
        if not alive[pos]:
            continue
        keep.append(order[pos])
        p = pts_o[pos]
        tail = pts_o[pos:]
        dx = tail[:, 0] - p[0]
        dy = tail[:, 1] - p[1]
        dz = tail[:, 2] - p[2]
        d2 = dx * dx + dy * dy + dz * dz
        alive[pos:] &= d2 > r2
    return np.asarray(keep, dtype=np.int64)


def allpairs_shortest_path(indptr: np.ndarray, indices: np.ndarray,
                           weights: np.ndarray, n: int) -> np.ndarray:
    """All-pairs shortest-path lengths on a CSR graph via repeated Dijkstra.

    Heap entries are (distance, node); equal distances pop in node order, the
    same rule the compiled backend uses.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    out = np.full((n, n), np.inf)
    for src in range(n):
        dist = out[src]
        dist[src] = 0.0
        heap = [(0.0, src)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                nd = d + weights[k]
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, int(v)))
    return out
