"""Plain SGD with global-norm gradient clipping."""

import math

import numpy as np

from ..errors import ConfigError
from .tensor import Parameter

CLIP_NORM_DEFAULT = 5.0


def global_grad_norm(params) -> float:
    """L2 norm over the concatenation of all gradients."""
    total = 0.0
    for p in params:
        g = p.gradient
        total += float(np.dot(g.reshape(-1), g.reshape(-1)))
    return math.sqrt(total)


def clip_gradients(params, max_norm: float = CLIP_NORM_DEFAULT) -> float:
    """Scale all gradients so the global norm is at most max_norm.

    Returns the pre-clip norm. Training paths call this before every
    sgd_step; desk-scale recurrent nets occasionally diverge without it.
    """
    norm = global_grad_norm(params)
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for p in params:
            p.gradient *= scale
    return norm


def sgd_step(params, learning_rate: float) -> None:
    """value <- value - lr * gradient for every parameter, then zero grads.

    Updates in place so live views of the parameter arrays stay valid.
    """
    if not learning_rate > 0.0:
        raise ConfigError(f"learning rate must be positive, got {learning_rate}")
    for p in params:
        p.value.data -= learning_rate * p.gradient
        p.zero_grad()


def check_finite(params) -> bool:
    """True when every parameter value is finite."""
    return all(np.isfinite(p.value.data).all() for p in params)


__all__ = [
    "CLIP_NORM_DEFAULT",
    "global_grad_norm",
    "clip_gradients",
    "sgd_step",
    "check_finite",
    "Parameter",
]
