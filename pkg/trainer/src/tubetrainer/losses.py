"""Masked training loss and the exact evaluation-mode loss.

The training variant runs on float32 tensors with an epsilon inside the
square roots so gradients stay finite.  The reporting variant reproduces the
evaluator's documented formula (hard masks, clamped log, no epsilon) in
float64 and is the number cross-checked against the curvefield `loss`
command.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

BCE_EPS = 1e-7
_GRAD_EPS = 1e-12


def training_loss(pred_field, pred_logits, gt_field, gt_closeness,
                  closeness_radius: float, field_radius: float):
    """Returns (total, components dict).  Tensors are (B, C, ...)."""
    gt_norm = torch.sqrt((gt_field * gt_field).sum(dim=1) + _GRAD_EPS)
    field_mask = gt_norm <= field_radius
    norm_mask = gt_norm <= closeness_radius

    diff = pred_field - gt_field
    err = torch.sqrt((diff * diff).sum(dim=1) + _GRAD_EPS)
    if field_mask.any():
        l_field = err[field_mask].mean()
    else:
        l_field = pred_field.sum() * 0.0

    pred_norm = torch.sqrt((pred_field * pred_field).sum(dim=1) + _GRAD_EPS)
    if norm_mask.any():
        l_norm = torch.abs(pred_norm - gt_norm)[norm_mask].mean()
    else:
        l_norm = pred_field.sum() * 0.0

    l_cls = F.binary_cross_entropy_with_logits(pred_logits.squeeze(1), gt_closeness)

    total = l_field + l_cls + l_norm
    return total, {
        "field": float(l_field.detach()),
        "closeness": float(l_cls.detach()),
        "norm": float(l_norm.detach()),
        "total": float(total.detach()),
    }


def report_loss(pred_field: np.ndarray, pred_closeness: np.ndarray,
                gt_field: np.ndarray, gt_closeness: np.ndarray,
                closeness_radius: float, field_radius: float) -> dict:
    """Documented loss formula in float64 on (nx, ny, nz[, 3]) arrays."""
    pred_field = np.asarray(pred_field, dtype=np.float64)
    gt_field = np.asarray(gt_field, dtype=np.float64)
    pred_closeness = np.asarray(pred_closeness, dtype=np.float64)
    gt_closeness = np.asarray(gt_closeness, dtype=np.float64)

    gt_norm = np.sqrt((gt_field * gt_field).sum(axis=-1))
    field_mask = gt_norm <= field_radius
    norm_mask = gt_norm <= closeness_radius
    diff = pred_field - gt_field
    err = np.sqrt((diff * diff).sum(axis=-1))
    l_field = float(err[field_mask].mean())
    pred_norm = np.sqrt((pred_field * pred_field).sum(axis=-1))
    l_norm = float(np.abs(pred_norm - gt_norm)[norm_mask].mean())
    p = np.clip(pred_closeness, BCE_EPS, 1.0 - BCE_EPS)
    l_cls = float(np.mean(-(gt_closeness * np.log(p) + (1.0 - gt_closeness) * np.log(1.0 - p))))
    return {
        "field": l_field,
        "closeness": l_cls,
        "norm": l_norm,
        "total": l_field + l_cls + l_norm,
    }
