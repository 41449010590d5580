"""Computation record and reverse-mode backward pass.

Ops append nodes in execution order, so the record is topologically sorted
by construction and the backward pass is a single reversed sweep that
visits each node exactly once.
"""

import numpy as np

from ..errors import ShapeError
from .tensor import Parameter, Tensor


class Node:
    """One executed op: result, operands, and its local-gradient rule."""

    __slots__ = ("out", "parents", "grad_fn")

    def __init__(self, out, parents, grad_fn):
        self.out = out
        self.parents = parents
        self.grad_fn = grad_fn


class Tape:
    """Ordered record of executed ops for one forward computation."""

    def __init__(self):
        self.nodes: list[Node] = []

    def record(self, out: Tensor, parents: tuple, grad_fn) -> Tensor:
        """Register an op result. grad_fn(grad_out) returns one gradient
        array (or None) per parent, in parent order."""
        self.nodes.append(Node(out, parents, grad_fn))
        return out

    def __len__(self):
        return len(self.nodes)


def backward(loss: Tensor, tape: Tape) -> None:
    """Accumulate d(loss)/d(param) into every Parameter reached by the tape.

    Parameters not touching the loss keep their current (zero) gradient.
    Deterministic: accumulation order is fixed by the record.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(tape.nodes):
        grad_out = grads.pop(id(node.out), None)
        if grad_out is None:
            continue
        parent_grads = node.grad_fn(grad_out)
        for parent, g in zip(node.parents, parent_grads):
            if g is None:
                continue
            if isinstance(parent, Parameter):
                parent.gradient += g.reshape(parent.gradient.shape)
            else:
                key = id(parent)
                if key in grads:
                    # No in-place update: grad arrays may be shared between
                    # parents (e.g. add returns grad_out twice).
                    grads[key] = grads[key] + g
                else:
                    grads[key] = g
