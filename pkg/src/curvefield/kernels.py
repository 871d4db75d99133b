"""Kernel backend selection and shared entry points.

The compiled extension is preferred when it imported cleanly; the numpy
fallback implements identical semantics.  Set ``CURVEFIELD_KERNELS=python``
or ``=compiled`` to force a backend (the latter raises if the extension is
unavailable).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

TIE_TOL = _kernels_py.TIE_TOL

_requested = os.environ.get("CURVEFIELD_KERNELS", "auto").strip().lower()
if _requested in ("", "auto"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"
elif _requested in ("python", "py"):
    _impl = _kernels_py
    BACKEND = "python"
elif _requested in ("compiled", "c", "cython"):
    from . import _kernels as _impl  # type: ignore[attr-defined]

    BACKEND = "compiled"
else:
    raise ValueError(f"unknown CURVEFIELD_KERNELS value: {_requested!r}")


def backend() -> str:
    """Name of the active backend: 'compiled' or 'python'."""
    return BACKEND


def get_impl(name: str = "active"):
    """Return a backend module by name ('active', 'python', 'compiled')."""
    if name == "active":
        return _impl
    if name in ("python", "py"):
        return _kernels_py
    if name in ("compiled", "c", "cython"):
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    raise ValueError(f"unknown backend name: {name!r}")


def project_points(queries: np.ndarray, polyline_points: np.ndarray,
                   method: str = "indexed", impl=None):
    """Project query points onto a polyline.

    Returns ``(disp[N,3], dist[N], segment[N], t[N])`` where ``disp`` is the
    displacement from each query to its nearest curve point (the projection
    itself is ``query + disp``).  ``method`` selects the spatially indexed
    path or the all-segments scan; both are exact and agree bitwise.
    """
    mod = impl if impl is not None else _impl
    if method == "indexed":
        return mod.project_points_indexed(queries, polyline_points)
    if method == "brute":
        return mod.project_points_brute(queries, polyline_points)
    raise ValueError(f"unknown projection method: {method!r}")


def nms_keep(points: np.ndarray, confidence: np.ndarray, radius: float,
             impl=None) -> np.ndarray:
    """Indices kept by greedy suppression, in selection order.

    Visit order is highest confidence first; confidence ties break by
    ascending lexicographic point order.
    """
    points = np.asarray(points, dtype=np.float64)
    confidence = np.asarray(confidence, dtype=np.float64)
    order = np.lexsort(
        (points[:, 2], points[:, 1], points[:, 0], -confidence)
    ).astype(np.int64)
    mod = impl if impl is not None else _impl
    return mod.nms_suppress(points, float(radius), order)


def allpairs_shortest_path(indptr, indices, weights, n, impl=None) -> np.ndarray:
    """Dense matrix of shortest-path lengths over a CSR graph."""
    mod = impl if impl is not None else _impl
    return mod.allpairs_shortest_path(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
        int(n),
    )
