"""Training loop and prediction export.

Overfits the two-headed network on one synthetic tube volume produced by the
curvefield CLI, then writes full-volume predictions back in the wire format
so the curvefield `infer`/`eval`/`loss` commands can consume them.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from .data import TubeSample, batch_tensors, random_patch
from .losses import report_loss, training_loss
from .model import TwoHeadNet


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    volume: str
    gt_field: str
    gt_closeness: str
    out_dir: str
    patch_size: int = 32
    batch_size: int = 2
    iterations: int = 2000
    lr: float = 2e-3
    # (fraction of iterations, new learning rate)
    lr_schedule: tuple = ((0.3, 1e-3), (0.5, 1e-4))
    closeness_radius: float = 10.0
    field_radius: float = 5.0
    base_channels: int = 12
    augment: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.patch_size % 4 != 0:
            raise ValueError("patch size must be divisible by 4")
        if not 0 < self.field_radius <= self.closeness_radius:
            raise ValueError("need 0 < field radius <= closeness radius")

    @classmethod
    def from_json(cls, path) -> "TrainConfig":
        payload = json.loads(Path(path).read_text())
        payload["lr_schedule"] = tuple(
            (float(f), float(lr)) for f, lr in payload.get("lr_schedule",
                                                           cls.lr_schedule)
        )
        return cls(**payload)


def train(config: TrainConfig):
    """Returns (model, history).  Writes checkpoint.pt and history.json."""
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    sample = TubeSample.load(config.volume, config.gt_field, config.gt_closeness)

    model = TwoHeadNet(config.base_channels)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    milestones = {
        int(frac * config.iterations): lr for frac, lr in config.lr_schedule
    }

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    history = []
    model.train()
    for step in range(config.iterations):
        if step in milestones:
            for group in optimizer.param_groups:
                group["lr"] = milestones[step]
        patches = [
            random_patch(sample, config.patch_size, rng, augment=config.augment)
            for _ in range(config.batch_size)
        ]
        volumes, fields, closeness = batch_tensors(patches)
        pred_field, pred_logits = model(volumes)
        total, components = training_loss(
            pred_field, pred_logits, fields, closeness,
            config.closeness_radius, config.field_radius,
        )
        if not math.isfinite(components["total"]):
            (out_dir / "history.json").write_text(json.dumps(history, indent=2))
            raise TrainingDivergedError(
                f"loss became non-finite at iteration {step}; history dumped to "
                f"{out_dir / 'history.json'}"
            )
        optimizer.zero_grad()
        total.backward()
        optimizer.step()
        history.append({"iteration": step, **components})

    checkpoint = {
        "state_dict": model.state_dict(),
        "config": {**asdict(config), "lr_schedule": list(config.lr_schedule)},
    }
    torch.save(checkpoint, out_dir / "checkpoint.pt")
    (out_dir / "history.json").write_text(json.dumps(history, indent=2))
    return model, history


def load_checkpoint(path):
    checkpoint = torch.load(path, map_location="cpu", weights_only=False)
    config = checkpoint["config"]
    model = TwoHeadNet(config.get("base_channels", 12))
    model.load_state_dict(checkpoint["state_dict"])
    model.eval()
    return model, config


@torch.no_grad()
def predict_volume(model: TwoHeadNet, volume: np.ndarray):
    """Full-volume forward pass; spatial dims must be divisible by 4."""
    model.eval()
    x = torch.from_numpy(volume.astype(np.float32))[None, None]
    pred_field, pred_logits = model(x)
    field = np.moveaxis(pred_field[0].numpy(), 0, -1)
    closeness = torch.sigmoid(pred_logits)[0, 0].numpy()
    return field.astype(np.float32), closeness.astype(np.float32)


def export_predictions(model: TwoHeadNet, volume_path, out_prefix):
    """Writes <prefix>.field.{json,raw} and <prefix>.closeness.{json,raw}."""
    from . import wire

    header, volume = wire.read_volume(volume_path)
    if any(n % 4 != 0 for n in volume.shape):
        raise ValueError(f"volume shape {volume.shape} not divisible by 4")
    field, closeness = predict_volume(model, volume)
    prefix = Path(out_prefix)
    wire.write_volume(prefix.parent / f"{prefix.name}.field", header, field)
    wire.write_volume(prefix.parent / f"{prefix.name}.closeness", header, closeness)
    return field, closeness


def evaluate_export(field: np.ndarray, closeness: np.ndarray,
                    gt_field_path, gt_closeness_path,
                    closeness_radius: float, field_radius: float) -> dict:
    """Trainer-side loss report for exported float32 predictions."""
    from . import wire

    _, gt_field = wire.read_volume(gt_field_path)
    _, gt_closeness = wire.read_volume(gt_closeness_path)
    return report_loss(field, closeness, gt_field, gt_closeness,
                       closeness_radius, field_radius)
