from .layers import BatchNorm2D, Conv2D, Dense, LeakyReLU, ShapeMismatch
from .network import (
    Network,
    NetworkConfig,
    SgdMomentum,
    config_from_dict,
    config_to_dict,
    loss_and_grads,
    masked_softmax,
    parameter_count,
)
from . import checkpoint

__all__ = [
    "BatchNorm2D", "Conv2D", "Dense", "LeakyReLU", "ShapeMismatch",
    "Network", "NetworkConfig", "SgdMomentum", "config_from_dict",
    "config_to_dict", "loss_and_grads", "masked_softmax", "parameter_count",
    "checkpoint",
]
