"""From-scratch neural stack: dense + strided conv1d layers, MAE loss,
exact backprop, NAdam, training loop, and model files."""

from .network import (
    ACTIVATIONS,
    Conv1dSpec,
    DenseSpec,
    NetworkModel,
    NetworkSpec,
    backward,
    conv_window_count,
    forward,
    initialize_model,
    mae_loss,
)
from .optimizer import NAdamHyper, NAdamState, nadam_step
from .serialize import load_model, save_model
from .training import TrainConfig, train

__all__ = [
    "ACTIVATIONS",
    "Conv1dSpec",
    "DenseSpec",
    "NetworkModel",
    "NetworkSpec",
    "NAdamHyper",
    "NAdamState",
    "TrainConfig",
    "backward",
    "conv_window_count",
    "forward",
    "initialize_model",
    "load_model",
    "mae_loss",
    "nadam_step",
    "save_model",
    "train",
]
