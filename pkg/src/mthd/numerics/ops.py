"""Differentiable ops. Every op executes eagerly and records its
local-gradient rule on the tape.

Shapes are strict: rank-2 for matrix ops, rank-1 for the distribution ops.
All ops keep finite inputs finite (softmax and cross-entropy are computed
with max-subtraction).
"""

import numpy as np

from ..errors import ShapeError
from .tape import Tape
from .tensor import Parameter, Tensor


def _data(x) -> np.ndarray:
    return x.value.data if isinstance(x, Parameter) else x.data


def matmul(tape: Tape, a, b) -> Tensor:
    """Matrix product (m x k) @ (k x n) -> (m x n)."""
    da, db = _data(a), _data(b)
    if da.ndim != 2 or db.ndim != 2 or da.shape[1] != db.shape[0]:
        raise ShapeError(f"matmul shapes do not agree: {da.shape} x {db.shape}")
    out = Tensor(da @ db)

    def grad_fn(g):
        return g @ db.T, da.T @ g

    return tape.record(out, (a, b), grad_fn)


def add(tape: Tape, a, b) -> Tensor:
    """Elementwise sum; also broadcasts a (1 x n) or (n,) row over (T x n)."""
    da, db = _data(a), _data(b)
    if da.shape == db.shape:
        out = Tensor(da + db)

        def grad_fn(g):
            return g, g

    elif da.ndim == 2 and db.reshape(-1).shape == (da.shape[1],):
        out = Tensor(da + db.reshape(1, -1))

        def grad_fn(g):
            return g, g.sum(axis=0).reshape(db.shape)

    else:
        raise ShapeError(f"add shapes do not agree: {da.shape} + {db.shape}")
    return tape.record(out, (a, b), grad_fn)


def mul(tape: Tape, a, b) -> Tensor:
    """Elementwise product of same-shaped tensors."""
    da, db = _data(a), _data(b)
    if da.shape != db.shape:
        raise ShapeError(f"mul shapes do not agree: {da.shape} * {db.shape}")
    out = Tensor(da * db)

    def grad_fn(g):
        return g * db, g * da

    return tape.record(out, (a, b), grad_fn)


def affine(tape: Tape, a, scale: float, shift: float) -> Tensor:
    """scale * a + shift with scalar constants (covers negation, 1 - x)."""
    da = _data(a)
    out = Tensor(scale * da + shift)

    def grad_fn(g):
        return (scale * g,)

    return tape.record(out, (a,), grad_fn)


def sigmoid(tape: Tape, a) -> Tensor:
    da = _data(a)
    s = np.empty_like(da)
    pos = da >= 0
    s[pos] = 1.0 / (1.0 + np.exp(-da[pos]))
    ex = np.exp(da[~pos])
    s[~pos] = ex / (1.0 + ex)
    out = Tensor(s)

    def grad_fn(g):
        return (g * s * (1.0 - s),)

    return tape.record(out, (a,), grad_fn)


def tanh(tape: Tape, a) -> Tensor:
    t = np.tanh(_data(a))
    out = Tensor(t)

    def grad_fn(g):
        return (g * (1.0 - t * t),)

    return tape.record(out, (a,), grad_fn)


def softmax(tape: Tape, v) -> Tensor:
    """Stable softmax of a rank-1 tensor; output sums to 1."""
    dv = _data(v)
    if dv.ndim != 1 or dv.size == 0:
        raise ShapeError(f"softmax needs a nonempty vector, got shape {dv.shape}")
    e = np.exp(dv - dv.max())
    p = e / e.sum()
    out = Tensor(p)

    def grad_fn(g):
        return (p * (g - float(p @ g)),)

    return tape.record(out, (v,), grad_fn)


def log_softmax(tape: Tape, v) -> Tensor:
    """Stable log softmax of a rank-1 tensor; exp of output sums to 1."""
    dv = _data(v)
    if dv.ndim != 1 or dv.size == 0:
        raise ShapeError(f"log_softmax needs a nonempty vector, got shape {dv.shape}")
    m = dv.max()
    log_z = m + np.log(np.exp(dv - m).sum())
    out = Tensor(dv - log_z)
    p = np.exp(out.data)

    def grad_fn(g):
        return (g - p * g.sum(),)

    return tape.record(out, (v,), grad_fn)


def cross_entropy(tape: Tape, logits, target_id: int) -> Tensor:
    """-log softmax(logits)[target_id] as a scalar tensor."""
    dl = _data(logits)
    if dl.ndim != 1 or dl.size == 0:
        raise ShapeError(f"cross_entropy needs a nonempty vector, got {dl.shape}")
    if not 0 <= target_id < dl.size:
        raise IndexError(f"target id {target_id} outside vocab of {dl.size}")
    m = dl.max()
    log_z = m + np.log(np.exp(dl - m).sum())
    out = Tensor(np.asarray(log_z - dl[target_id]))
    p = np.exp(dl - log_z)

    def grad_fn(g):
        d = p * float(g)
        d[target_id] -= float(g)
        return (d,)

    return tape.record(out, (logits,), grad_fn)


def concat_cols(tape: Tape, a, b) -> Tensor:
    """Column-wise concat of (T x m) and (T x n) -> (T x (m + n))."""
    da, db = _data(a), _data(b)
    if da.ndim != 2 or db.ndim != 2 or da.shape[0] != db.shape[0]:
        raise ShapeError(f"concat_cols shapes do not agree: {da.shape}, {db.shape}")
    out = Tensor(np.hstack([da, db]))
    m = da.shape[1]

    def grad_fn(g):
        return g[:, :m], g[:, m:]

    return tape.record(out, (a, b), grad_fn)


def slice_cols(tape: Tape, a, start: int, stop: int) -> Tensor:
    da = _data(a)
    if da.ndim != 2:
        raise ShapeError(f"slice_cols needs rank 2, got {da.shape}")
    out = Tensor(da[:, start:stop].copy())

    def grad_fn(g):
        full = np.zeros_like(da)
        full[:, start:stop] = g
        return (full,)

    return tape.record(out, (a,), grad_fn)


def row(tape: Tape, a, i: int) -> Tensor:
    """Row i of a (T x n) tensor as (1 x n)."""
    da = _data(a)
    out = Tensor(da[i : i + 1].copy())

    def grad_fn(g):
        full = np.zeros_like(da)
        full[i : i + 1] = g
        return (full,)

    return tape.record(out, (a,), grad_fn)


def stack_rows(tape: Tape, rows_: list) -> Tensor:
    """Stack T tensors of shape (1 x n) into (T x n)."""
    datas = [_data(r) for r in rows_]
    out = Tensor(np.vstack(datas))

    def grad_fn(g):
        return tuple(g[i : i + 1] for i in range(len(datas)))

    return tape.record(out, tuple(rows_), grad_fn)


def gather_rows(tape: Tape, table, ids) -> Tensor:
    """Rows of an embedding table by id list -> (len(ids) x d)."""
    dt = _data(table)
    idx = np.asarray(ids, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= dt.shape[0]):
        raise IndexError(f"row id outside table of {dt.shape[0]} rows")
    out = Tensor(dt[idx])

    def grad_fn(g):
        full = np.zeros_like(dt)
        np.add.at(full, idx, g)
        return (full,)

    return tape.record(out, (table,), grad_fn)


def mean_rows(tape: Tape, a) -> Tensor:
    """Mean over rows of (T x n) -> (1 x n)."""
    da = _data(a)
    if da.ndim != 2 or da.shape[0] == 0:
        raise ShapeError(f"mean_rows needs nonempty rank 2, got {da.shape}")
    t = da.shape[0]
    out = Tensor(da.mean(axis=0, keepdims=True))

    def grad_fn(g):
        return (np.repeat(g / t, t, axis=0),)

    return tape.record(out, (a,), grad_fn)


def reshape(tape: Tape, a, shape: tuple) -> Tensor:
    da = _data(a)
    out = Tensor(da.reshape(shape))

    def grad_fn(g):
        return (g.reshape(da.shape),)

    return tape.record(out, (a,), grad_fn)


def add_scalar(tape: Tape, a, b) -> Tensor:
    """Sum of two scalar tensors (loss accumulation)."""
    da, db = _data(a), _data(b)
    if da.size != 1 or db.size != 1:
        raise ShapeError(f"add_scalar needs scalars, got {da.shape}, {db.shape}")
    out = Tensor(np.asarray(da.reshape(()) + db.reshape(())))

    def grad_fn(g):
        return g.reshape(da.shape), g.reshape(db.shape)

    return tape.record(out, (a, b), grad_fn)
