# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Mirrors ``_kernels_py`` scalar-for-scalar: same expression trees, same
tie-handling, same heap ordering, so both backends agree bitwise.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()

cdef double TIE_TOL = 1e-9

ctypedef cnp.int64_t i64


cdef inline double _seg_dist(double qx, double qy, double qz,
                             double ax, double ay, double az,
                             double ex, double ey, double ez,
                             double inv,
                             double* out_t,
                             double* out_fx, double* out_fy, double* out_fz) noexcept nogil:
    # Emits the displacement f = projection - query; see the fallback module.
    cdef double dx = qx - ax
    cdef double dy = qy - ay
    cdef double dz = qz - az
    cdef double t = (dx * ex + dy * ey + dz * ez) * inv
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    cdef double fx = t * ex - dx
    cdef double fy = t * ey - dy
    cdef double fz = t * ez - dz
    out_t[0] = t
    out_fx[0] = fx
    out_fy[0] = fy
    out_fz[0] = fz
    return sqrt(fx * fx + fy * fy + fz * fz)


cdef inline void _scan_segments(double qx, double qy, double qz,
                                const double[:, ::1] a, const double[:, ::1] e,
                                const double[::1] inv,
                                const i64[::1] cand, Py_ssize_t ncand,
                                double* best_d, i64* best_s, double* best_t,
                                double* best_px, double* best_py, double* best_pz) noexcept nogil:
    """Canonical update scan over candidate segments in ascending index order."""
    cdef Py_ssize_t k
    cdef i64 s
    cdef double d, t, px, py, pz
    for k in range(ncand):
        s = cand[k]
        d = _seg_dist(qx, qy, qz, a[s, 0], a[s, 1], a[s, 2],
                      e[s, 0], e[s, 1], e[s, 2], inv[s],
                      &t, &px, &py, &pz)
        if d < best_d[0] - TIE_TOL:
            best_d[0] = d
            best_s[0] = s
            best_t[0] = t
            best_px[0] = px
            best_py[0] = py
            best_pz[0] = pz


def project_points_brute(queries, pts):
    """All-segments scan; see the fallback module for the contract."""
    cdef const double[:, ::1] q = np.ascontiguousarray(queries, dtype=np.float64)
    pts = np.asarray(pts, dtype=np.float64)
    a_np = np.ascontiguousarray(pts[:-1])
    e_np = np.ascontiguousarray(pts[1:] - pts[:-1])
    ex_, ey_, ez_ = e_np[:, 0], e_np[:, 1], e_np[:, 2]
    inv_np = 1.0 / (ex_ * ex_ + ey_ * ey_ + ez_ * ez_)

    cdef const double[:, ::1] a = a_np
    cdef const double[:, ::1] e = e_np
    cdef const double[::1] inv = np.ascontiguousarray(inv_np)

    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t ns = a.shape[0]
    disp_np = np.zeros((n, 3), dtype=np.float64)
    dist_np = np.full(n, np.inf, dtype=np.float64)
    seg_np = np.full(n, -1, dtype=np.int64)
    t_np = np.zeros(n, dtype=np.float64)
    cdef double[:, ::1] disp = disp_np
    cdef double[::1] dist = dist_np
    cdef i64[::1] seg = seg_np
    cdef double[::1] tt = t_np

    cdef Py_ssize_t i, s
    cdef double qx, qy, qz, d, t, px, py, pz
    cdef double best_d, best_t, best_px, best_py, best_pz
    cdef i64 best_s
    with nogil:
        for i in range(n):
            qx = q[i, 0]
            qy = q[i, 1]
            qz = q[i, 2]
            best_d = dist[i]
            best_s = -1
            best_t = 0.0
            best_px = 0.0
            best_py = 0.0
            best_pz = 0.0
            for s in range(ns):
                d = _seg_dist(qx, qy, qz, a[s, 0], a[s, 1], a[s, 2],
                              e[s, 0], e[s, 1], e[s, 2], inv[s],
                              &t, &px, &py, &pz)
                if d < best_d - TIE_TOL:
                    best_d = d
                    best_s = s
                    best_t = t
                    best_px = px
                    best_py = py
                    best_pz = pz
            dist[i] = best_d
            seg[i] = best_s
            tt[i] = best_t
            disp[i, 0] = best_px
            disp[i, 1] = best_py
            disp[i, 2] = best_pz
    return disp_np, dist_np, seg_np, t_np


def project_points_indexed(queries, pts):
    """Exact projection through a uniform bucket grid over the segments.

    Cells are visited in expanding Chebyshev rings around the query's cell;
    the walk stops once the ring's geometric lower bound exceeds the current
    best distance (plus the tie tolerance).  Collected candidates are then
    re-scanned in ascending segment order, which reproduces the brute-force
    result bitwise.  Queries whose planned walk would cost more than a plain
    scan fall back to the scan directly.
    """
    q_np = np.ascontiguousarray(queries, dtype=np.float64)
    pts = np.asarray(pts, dtype=np.float64)
    a_np = np.ascontiguousarray(pts[:-1])
    b_np = np.ascontiguousarray(pts[1:])
    e_np = np.ascontiguousarray(b_np - a_np)
    ex_, ey_, ez_ = e_np[:, 0], e_np[:, 1], e_np[:, 2]
    inv_np = 1.0 / (ex_ * ex_ + ey_ * ey_ + ez_ * ez_)

    lo_np = np.minimum(a_np, b_np)
    hi_np = np.maximum(a_np, b_np)
    gmin = lo_np.min(axis=0)
    gmax = hi_np.max(axis=0)
    extent = float((gmax - gmin).max())
    seg_len = np.sqrt((e_np * e_np).sum(axis=1))
    # h >= extent/64 keeps the bucket grid at most 65 cells per axis.
    h = max(float(seg_len.max()), extent / 64.0, 1e-9)
    dims_np = np.floor((gmax - gmin) / h).astype(np.int64) + 1

    # CSR bucket table: every cell overlapped by a segment's AABB lists it.
    clo = np.clip(np.floor((lo_np - gmin) / h).astype(np.int64), 0, dims_np - 1)
    chi = np.clip(np.floor((hi_np - gmin) / h).astype(np.int64), 0, dims_np - 1)
    spans = (chi - clo + 1).prod(axis=1)
    total = int(spans.sum())
    ncells = int(dims_np.prod())
    counts = np.zeros(ncells + 1, dtype=np.int64)
    sy, sz = int(dims_np[1]), int(dims_np[2])
    flat_ids = np.empty(total, dtype=np.int64)
    flat_seg = np.empty(total, dtype=np.int64)
    pos = 0
    for s in range(a_np.shape[0]):
        x0, y0, z0 = clo[s]
        x1, y1, z1 = chi[s]
        for cx in range(x0, x1 + 1):
            for cy in range(y0, y1 + 1):
                base = (cx * sy + cy) * sz
                for cz in range(z0, z1 + 1):
                    flat_ids[pos] = base + cz
                    flat_seg[pos] = s
                    pos += 1
    order = np.argsort(flat_ids, kind="stable")
    items_np = flat_seg[order]
    np.add.at(counts, flat_ids + 1, 1)
    start_np = np.cumsum(counts)

    return _indexed_walk(q_np, a_np, e_np, np.ascontiguousarray(inv_np),
                         np.ascontiguousarray(pts), start_np, items_np,
                         np.ascontiguousarray(gmin), float(h),
                         np.ascontiguousarray(dims_np))


def _indexed_walk(const double[:, ::1] q, const double[:, ::1] a,
                  const double[:, ::1] e, const double[::1] inv,
                  const double[:, ::1] verts,
                  const i64[::1] cell_start, const i64[::1] cell_items,
                  const double[::1] gmin, double h, const i64[::1] dims):
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t ns = a.shape[0]
    cdef Py_ssize_t nv = verts.shape[0]

    disp_np = np.zeros((n, 3), dtype=np.float64)
    dist_np = np.full(n, np.inf, dtype=np.float64)
    seg_np = np.full(n, -1, dtype=np.int64)
    t_np = np.zeros(n, dtype=np.float64)
    cdef double[:, ::1] disp = disp_np
    cdef double[::1] dist = dist_np
    cdef i64[::1] seg = seg_np
    cdef double[::1] tt = t_np

    stamp_np = np.zeros(ns, dtype=np.int64)
    cand_np = np.empty(ns, dtype=np.int64)
    cdef i64[::1] stamp = stamp_np
    cdef i64[::1] cand = cand_np

    cdef Py_ssize_t i, k, m, side
    cdef i64 s, qstamp, key
    cdef double qx, qy, qz, d, t, px, py, pz, u0, lb, planned
    cdef double best_d, best_t, best_px, best_py, best_pz
    cdef i64 best_s
    cdef i64 cx, cy, cz, ring, ring_max, x, y, z, cell, lim
    cdef i64 dx0 = dims[0], dx1 = dims[1], dx2 = dims[2]
    cdef Py_ssize_t ncand

    with nogil:
        for i in range(n):
            qx = q[i, 0]
            qy = q[i, 1]
            qz = q[i, 2]

            # Seed an upper bound from three anchor vertices.
            u0 = _vert_dist(qx, qy, qz, verts, 0)
            d = _vert_dist(qx, qy, qz, verts, nv // 2)
            if d < u0:
                u0 = d
            d = _vert_dist(qx, qy, qz, verts, nv - 1)
            if d < u0:
                u0 = d

            planned = 2.0 * floor((u0 + TIE_TOL) / h) + 5.0
            if planned * planned * planned > 4.0 * ns + 64.0:
                # Walk would visit more cells than a plain scan costs.
                best_d = dist[i]
                best_s = -1
                best_t = 0.0
                best_px = 0.0
                best_py = 0.0
                best_pz = 0.0
                for k in range(ns):
                    d = _seg_dist(qx, qy, qz, a[k, 0], a[k, 1], a[k, 2],
                                  e[k, 0], e[k, 1], e[k, 2], inv[k],
                                  &t, &px, &py, &pz)
                    if d < best_d - TIE_TOL:
                        best_d = d
                        best_s = k
                        best_t = t
                        best_px = px
                        best_py = py
                        best_pz = pz
                dist[i] = best_d
                seg[i] = best_s
                tt[i] = best_t
                disp[i, 0] = best_px
                disp[i, 1] = best_py
                disp[i, 2] = best_pz
                continue

            cx = <i64>floor((qx - gmin[0]) / h)
            cy = <i64>floor((qy - gmin[1]) / h)
            cz = <i64>floor((qz - gmin[2]) / h)

            ring_max = _ring_limit(cx, dx0)
            lim = _ring_limit(cy, dx1)
            if lim > ring_max:
                ring_max = lim
            lim = _ring_limit(cz, dx2)
            if lim > ring_max:
                ring_max = lim

            qstamp = i + 1
            ncand = 0
            best_d = u0
            ring = 0
            while ring <= ring_max:
                if ring > 0:
                    lb = (ring - 1) * h
                    if lb > best_d + TIE_TOL:
                        break
                if ring == 0:
                    if 0 <= cx < dx0 and 0 <= cy < dx1 and 0 <= cz < dx2:
                        cell = (cx * dx1 + cy) * dx2 + cz
                        ncand = _collect(cell, cell_start, cell_items, stamp,
                                         qstamp, cand, ncand,
                                         qx, qy, qz, a, e, inv, &best_d)
                else:
                    # Two x faces, full y/z extent.
                    for side in range(2):
                        x = cx - ring if side == 0 else cx + ring
                        if x < 0 or x >= dx0:
                            continue
                        for y in range(cy - ring, cy + ring + 1):
                            if y < 0 or y >= dx1:
                                continue
                            for z in range(cz - ring, cz + ring + 1):
                                if z < 0 or z >= dx2:
                                    continue
                                cell = (x * dx1 + y) * dx2 + z
                                ncand = _collect(cell, cell_start, cell_items, stamp,
                                                 qstamp, cand, ncand,
                                                 qx, qy, qz, a, e, inv, &best_d)
                    # Two y faces, interior x, full z.
                    for side in range(2):
                        y = cy - ring if side == 0 else cy + ring
                        if y < 0 or y >= dx1:
                            continue
                        for x in range(cx - ring + 1, cx + ring):
                            if x < 0 or x >= dx0:
                                continue
                            for z in range(cz - ring, cz + ring + 1):
                                if z < 0 or z >= dx2:
                                    continue
                                cell = (x * dx1 + y) * dx2 + z
                                ncand = _collect(cell, cell_start, cell_items, stamp,
                                                 qstamp, cand, ncand,
                                                 qx, qy, qz, a, e, inv, &best_d)
                    # Two z faces, interior x and y.
                    for side in range(2):
                        z = cz - ring if side == 0 else cz + ring
                        if z < 0 or z >= dx2:
                            continue
                        for x in range(cx - ring + 1, cx + ring):
                            if x < 0 or x >= dx0:
                                continue
                            for y in range(cy - ring + 1, cy + ring):
                                if y < 0 or y >= dx1:
                                    continue
                                cell = (x * dx1 + y) * dx2 + z
                                ncand = _collect(cell, cell_start, cell_items, stamp,
                                                 qstamp, cand, ncand,
                                                 qx, qy, qz, a, e, inv, &best_d)
                ring += 1

            # Ascending-index insertion sort, then the canonical scan.
            for k in range(1, ncand):
                key = cand[k]
                m = k - 1
                while m >= 0 and cand[m] > key:
                    cand[m + 1] = cand[m]
                    m -= 1
                cand[m + 1] = key

            best_d = dist[i]
            best_s = -1
            best_t = 0.0
            best_px = 0.0
            best_py = 0.0
            best_pz = 0.0
            _scan_segments(qx, qy, qz, a, e, inv, cand, ncand,
                           &best_d, &best_s, &best_t,
                           &best_px, &best_py, &best_pz)
            dist[i] = best_d
            seg[i] = best_s
            tt[i] = best_t
            disp[i, 0] = best_px
            disp[i, 1] = best_py
            disp[i, 2] = best_pz
    return disp_np, dist_np, seg_np, t_np


cdef inline double _vert_dist(double qx, double qy, double qz,
                              const double[:, ::1] verts, Py_ssize_t v) noexcept nogil:
    cdef double dx = qx - verts[v, 0]
    cdef double dy = qy - verts[v, 1]
    cdef double dz = qz - verts[v, 2]
    return sqrt(dx * dx + dy * dy + dz * dz)


cdef inline i64 _ring_limit(i64 c, i64 dim) noexcept nogil:
    """Largest ring index at which cells along this axis still exist."""
    cdef i64 a = c
    cdef i64 b = dim - 1 - c
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    return a if a > b else b


cdef inline Py_ssize_t _collect(i64 cell, const i64[::1] cell_start,
                                const i64[::1] cell_items,
                                i64[::1] stamp, i64 qstamp, i64[::1] cand,
                                Py_ssize_t ncand,
                                double qx, double qy, double qz,
                                const double[:, ::1] a, const double[:, ::1] e,
                                const double[::1] inv,
                                double* best_d) noexcept nogil:
    """Gather unseen segments from one cell, updating the provisional bound."""
    cdef Py_ssize_t k
    cdef i64 s
    cdef double t, px, py, pz, d
    for k in range(cell_start[cell], cell_start[cell + 1]):
        s = cell_items[k]
        if stamp[s] == qstamp:
            continue
        stamp[s] = qstamp
        cand[ncand] = s
        ncand += 1
        d = _seg_dist(qx, qy, qz, a[s, 0], a[s, 1], a[s, 2],
                      e[s, 0], e[s, 1], e[s, 2], inv[s], &t, &px, &py, &pz)
        if d < best_d[0]:
            best_d[0] = d
    return ncand


def nms_suppress(points, radius, order):
    """Greedy suppression; see the fallback module for the contract."""
    pts_np = np.asarray(points, dtype=np.float64)
    order_np = np.ascontiguousarray(order, dtype=np.int64)
    pts_o_np = np.ascontiguousarray(pts_np[order_np])
    cdef const double[:, ::1] pts_o = pts_o_np
    cdef const i64[::1] order_v = order_np
    cdef Py_ssize_t n = order_v.shape[0]
    cdef double r2 = float(radius) * float(radius)

    alive_np = np.ones(n, dtype=np.uint8)
    keep_np = np.empty(n, dtype=np.int64)
    cdef cnp.uint8_t[::1] alive = alive_np
    cdef i64[::1] keep = keep_np

    cdef Py_ssize_t pos, j, nkeep = 0
    cdef double px, py, pz, dx, dy, dz, d2
    with nogil:
        for pos in range(n):
            if alive[pos] == 0:
                continue
            keep[nkeep] = order_v[pos]
            nkeep += 1
            px = pts_o[pos, 0]
            py = pts_o[pos, 1]
            pz = pts_o[pos, 2]
            for j in range(pos, n):
                if alive[j] == 0:
                    continue
                dx = pts_o[j, 0] - px
                dy = pts_o[j, 1] - py
                dz = pts_o[j, 2] - pz
                d2 = dx * dx + dy * dy + dz * dz
                if d2 <= r2:
                    alive[j] = 0
    return keep_np[:nkeep].copy()


def allpairs_shortest_path(indptr, indices, weights, n):
    """Repeated Dijkstra with a (distance, node)-ordered binary heap."""
    cdef const i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t nn = n
    out_np = np.full((nn, nn), np.inf, dtype=np.float64)
    cdef double[:, ::1] out = out_np

    cap = max(int(idx.shape[0]) + 1, 16)
    heap_d_np = np.empty(cap, dtype=np.float64)
    heap_n_np = np.empty(cap, dtype=np.int64)
    cdef double[::1] heap_d = heap_d_np
    cdef i64[::1] heap_n = heap_n_np

    cdef Py_ssize_t src, size, k
    cdef i64 u, v
    cdef double d, nd
    with nogil:
        for src in range(nn):
            out[src, src] = 0.0
            size = _heap_push(heap_d, heap_n, 0, 0.0, src)
            while size > 0:
                d = heap_d[0]
                u = heap_n[0]
                size = _heap_pop(heap_d, heap_n, size)
                if d > out[src, u]:
                    continue
                for k in range(ip[u], ip[u + 1]):
                    v = idx[k]
                    nd = d + w[k]
                    if nd < out[src, v]:
                        out[src, v] = nd
                        size = _heap_push(heap_d, heap_n, size, nd, v)
    return out_np


cdef inline bint _heap_less(double d1, i64 n1, double d2, i64 n2) noexcept nogil:
    if d1 != d2:
        return d1 < d2
    return n1 < n2


cdef inline Py_ssize_t _heap_push(double[::1] hd, i64[::1] hn, Py_ssize_t size,
                                  double d, i64 node) noexcept nogil:
    cdef Py_ssize_t i = size, parent
    cdef double td
    cdef i64 tn
    hd[i] = d
    hn[i] = node
    while i > 0:
        parent = (i - 1) >> 1
        if _heap_less(hd[i], hn[i], hd[parent], hn[parent]):
            td = hd[i]
            hd[i] = hd[parent]
            hd[parent] = td
            tn = hn[i]
            hn[i] = hn[parent]
            hn[parent] = tn
            i = parent
        else:
            break
    return size + 1


cdef inline Py_ssize_t _heap_pop(double[::1] hd, i64[::1] hn, Py_ssize_t size) noexcept nogil:
    cdef Py_ssize_t i = 0, child
    cdef double td
    cdef i64 tn
    size -= 1
    hd[0] = hd[size]
    hn[0] = hn[size]
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        if child + 1 < size and _heap_less(hd[child + 1], hn[child + 1], hd[child], hn[child]):
            child += 1
        if _heap_less(hd[child], hn[child], hd[i], hn[i]):
            td = hd[i]
            hd[i] = hd[child]
            hd[child] = td
            tn = hn[i]
            hn[i] = hn[child]
            hn[child] = tn
            i = child
        else:
            break
    return size
