from .layers import Conv2D, Dense, Flatten, MaxPool2, ReLU, LAYER_CODES
from .model import (
    Model,
    backward_from_logits,
    crossentropy_logits_grad,
    cw_margin,
    forward,
    input_gradient,
    loss_crossentropy,
    predict,
    softmax,
)
from .build import build_model, glorot
from .serialize import load_model, save_model
from .train import TrainConfig, mean_loss, train

__all__ = [
    "Conv2D",
    "Dense",
    "Flatten",
    "MaxPool2",
    "ReLU",
    "LAYER_CODES",
    "Model",
    "backward_from_logits",
    "crossentropy_logits_grad",
    "cw_margin",
    "forward",
    "input_gradient",
    "loss_crossentropy",
    "predict",
    "softmax",
    "build_model",
    "glorot",
    "load_model",
    "save_model",
    "TrainConfig",
    "mean_loss",
    "train",
]
