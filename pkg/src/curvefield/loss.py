"""Reference implementations of the three training-loss terms.

Usable as oracles for an external trainer and as standalone evaluators of a
predicted field/closeness pair against ground truth.  The field and norm
terms are averaged only over voxels whose ground-truth distance to the curve
is within their respective radii; the cross-entropy term averages over all
voxels.  All reductions use numpy's fixed-order pairwise summation, so
results are bitwise reproducible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import ScalarField, VectorField
from .errors import EmptyMaskError, GridMismatchError

# Probabilities are clamped to [BCE_EPS, 1 - BCE_EPS] before taking logs.
BCE_EPS = 1e-7


@dataclass(frozen=True)
class LossReport:
    field_loss: float
    closeness_loss: float
    norm_loss: float
    total: float
    field_mask_count: int
    norm_mask_count: int

    def as_text(self) -> str:
        lines = [
            f"field_loss = {self.field_loss!r}",
            f"closeness_loss = {self.closeness_loss!r}",
            f"norm_loss = {self.norm_loss!r}",
            f"total = {self.total!r}",
            f"field_mask_count = {self.field_mask_count}",
            f"norm_mask_count = {self.norm_mask_count}",
        ]
        return "\n".join(lines) + "\n"


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(
            f"inputs live on different grids: {a.grid!r} vs {b.grid!r}"
        )


def field_loss(pred: VectorField, gt: VectorField, field_radius: float,
               squared: bool = False) -> float:
    """Mean error of the predicted vectors over the near-curve mask.

    The mask selects voxels whose ground-truth norm is <= ``field_radius``;
    the per-voxel term is the Euclidean norm of the prediction error, squared
    when ``squared`` is set.
    """
    _check_same_grid(pred, gt)
    r = float(field_radius)
    if not (np.isfinite(r) and r > 0):
        raise ValueError(f"field radius must be > 0, got {field_radius!r}")
    mask = gt.norms() <= r
    if not np.any(mask):
        raise EmptyMaskError(f"no voxel has ground-truth norm <= {r} mm")
    diff = pred.vectors[mask] - gt.vectors[mask]
    x, y, z = diff[:, 0], diff[:, 1], diff[:, 2]
    err2 = x * x + y * y + z * z
    per_voxel = err2 if squared else np.sqrt(err2)
    return float(np.mean(per_voxel))


def closeness_loss(pred: ScalarField, gt: ScalarField) -> float:
    """Mean binary cross entropy over all voxels."""
    _check_same_grid(pred, gt)
    if not gt.is_binary():
        raise ValueError("ground-truth closeness must be binary {0, 1}")
    p = pred.values
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("predicted closeness must lie in [0, 1]")
    p = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    c = gt.values
    bce = -(c * np.log(p) + (1.0 - c) * np.log(1.0 - p))
    return float(np.mean(bce))


def norm_loss(pred: VectorField, gt: VectorField, closeness_radius: float) -> float:
    """Mean absolute difference of vector norms over the closeness mask."""
    _check_same_grid(pred, gt)
    r = float(closeness_radius)
    if not (np.isfinite(r) and r > 0):
        raise ValueError(f"closeness radius must be > 0, got {closeness_radius!r}")
    gt_norms = gt.norms()
    mask = gt_norms <= r
    if not np.any(mask):
        raise EmptyMaskError(f"no voxel has ground-truth norm <= {r} mm")
    return float(np.mean(np.abs(pred.norms()[mask] - gt_norms[mask])))


def total_loss(pred_field: VectorField, gt_field: VectorField,
               pred_closeness: ScalarField, gt_closeness: ScalarField,
               closeness_radius: float, field_radius: float,
               squared: bool = False) -> LossReport:
    """Sum of the three loss terms plus the mask sizes they averaged over."""
    if not (0 < field_radius <= closeness_radius):
        warnings.warn(
            f"expected 0 < field radius <= closeness radius, got "
            f"{field_radius} and {closeness_radius}",
            stacklevel=2,
        )
    lf = field_loss(pred_field, gt_field, field_radius, squared=squared)
    lc = closeness_loss(pred_closeness, gt_closeness)
    ln = norm_loss(pred_field, gt_field, closeness_radius)
    gt_norms = gt_field.norms()
    return LossReport(
        field_loss=lf,
        closeness_loss=lc,
        norm_loss=ln,
        total=lf + lc + ln,
        field_mask_count=int(np.count_nonzero(gt_norms <= float(field_radius))),
        norm_mask_count=int(np.count_nonzero(gt_norms <= float(closeness_radius))),
    )
