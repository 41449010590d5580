"""Tensor and Parameter containers.

Tensors are 64-bit float arrays of rank 0, 1 or 2, treated as immutable
values once created. Parameters pair a value tensor with a same-shaped
gradient buffer that optimizer steps reset to zero.
"""

import numpy as np

from ..errors import ShapeError


class Tensor:
    """Dense float64 array with shape; the substrate of all model math."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim > 2:
            raise ShapeError(f"tensors are rank <= 2, got shape {arr.shape}")
        self.data = arr

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def values(self) -> np.ndarray:
        """Row-major flat view of the values."""
        return self.data.reshape(-1)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.data).all())

    def __repr__(self):
        return f"Tensor(shape={self.shape})"


class Parameter:
    """Named trainable tensor with a gradient buffer of identical shape."""

    __slots__ = ("id", "value", "gradient")

    def __init__(self, id: str, value):
        self.id = id
        self.value = value if isinstance(value, Tensor) else Tensor(value)
        self.gradient = np.zeros_like(self.value.data)

    @property
    def data(self) -> np.ndarray:
        return self.value.data

    def zero_grad(self) -> None:
        self.gradient[...] = 0.0

    def __repr__(self):
        return f"Parameter({self.id!r}, shape={self.value.shape})"
