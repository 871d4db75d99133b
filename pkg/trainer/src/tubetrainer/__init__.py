"""Toy-scale trainer for attraction-field curve detection on synthetic tubes."""

from .losses import report_loss, training_loss
from .model import TwoHeadNet
from .train import (
    TrainConfig,
    TrainingDivergedError,
    export_predictions,
    load_checkpoint,
    predict_volume,
    train,
)

__version__ = "0.1.0"
