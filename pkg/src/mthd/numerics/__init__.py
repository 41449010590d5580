"""Dense tensor arithmetic with reverse-mode differentiation and SGD."""

from .tensor import Tensor, Parameter
from .tape import Tape, backward
from . import ops
from .optim import sgd_step, clip_gradients, global_grad_norm

__all__ = [
    "Tensor",
    "Parameter",
    "Tape",
    "backward",
    "ops",
    "sgd_step",
    "clip_gradients",
    "global_grad_norm",
]
