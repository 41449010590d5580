"""Inference and training kernels with backend selection.

Two interchangeable backends compute the same math:

* ``compiled`` — the Cython extension ``mthd._core`` (hot path),
* ``pure-python`` — numpy inference plus the tape for gradients.

The compiled backend is picked at import when the extension is available;
set ``MTHD_PURE_PY=1`` to force the fallback. Within one process the
selection is stable, which keeps decode/adapt runs reproducible.
"""

import os
from dataclasses import dataclass

import numpy as np

from ..numerics import Tape, backward
from . import graph
from .model import SeqModel

try:  # compiled kernels are optional
    from .. import _core
except ImportError:  # pragma: no cover - depends on build environment
    _core = None


@dataclass
class EncodedSource:
    """Per-sentence encoder products reused across decode steps."""

    annotations: np.ndarray  # T x 2h
    ann_proj: np.ndarray  # T x att
    state0: np.ndarray  # (h,)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class PyBackend:
    """numpy inference; gradients via the numerics tape."""

    name = "pure-python"

    def encode(self, model: SeqModel, source_ids) -> EncodedSource:
        cfg = model.config
        ids = graph.check_source_ids(source_ids, cfg)
        w = model.weights()
        h = cfg.hidden_dim
        t_len = len(ids)
        x = w["src_embed"][ids]  # T x d

        outs = {}
        for cell, order in (
            ("enc_fwd", range(t_len)),
            ("enc_bwd", range(t_len - 1, -1, -1)),
        ):
            gi_all = x @ w[f"{cell}.w_x"] + w[f"{cell}.b_x"]
            wh, bh = w[f"{cell}.w_h"], w[f"{cell}.b_h"]
            state = np.zeros(h)
            out = np.empty((t_len, h))
            for t in order:
                state = self._gru(gi_all[t], state, wh, bh, h)
                out[t] = state
            outs[cell] = out

        ann = np.hstack([outs["enc_fwd"], outs["enc_bwd"]])
        ann_proj = ann @ w["att.w_ann"] + w["att.bias"]
        state0 = np.tanh(ann.mean(axis=0) @ w["init.w"] + w["init.b"])
        return EncodedSource(ann, ann_proj, state0)

    @staticmethod
    def _gru(gi, state, wh, bh, h):
        gh = state @ wh + bh
        z = _sigmoid(gi[:h] + gh[:h])
        r = _sigmoid(gi[h : 2 * h] + gh[h : 2 * h])
        n = np.tanh(gi[2 * h :] + r * gh[2 * h :])
        return (1.0 - z) * n + z * state

    def step(self, model: SeqModel, enc: EncodedSource, state, prev_id: int,
             step_index: int = 0):
        cfg = model.config
        w = model.weights()
        h = cfg.hidden_dim
        act = np.tanh(enc.ann_proj + state @ w["att.w_state"])
        scores = act @ w["att.v"] + graph.location_prior(
            enc.annotations.shape[0], step_index
        )
        scores -= scores.max()
        alphas = np.exp(scores)
        alphas /= alphas.sum()
        context = alphas @ enc.annotations
        x = np.concatenate([w["tgt_embed"][int(prev_id)], context])
        gi = x @ w["dec.w_x"] + w["dec.b_x"]
        new_state = self._gru(gi, state, w["dec.w_h"], w["dec.b_h"], h)
        logits = new_state @ w["out.w"] + w["out.b"]
        m = logits.max()
        logprobs = logits - (m + np.log(np.exp(logits - m).sum()))
        return new_state, logprobs

    def accumulate_loss_grads(self, model: SeqModel, source_ids, target_ids) -> float:
        tape = Tape()
        loss = graph.sequence_nll(tape, model, source_ids, target_ids)
        backward(loss, tape)
        return loss.item()


class CoreBackend:
    """Cython kernels; same contracts as PyBackend."""

    name = "compiled"

    @staticmethod
    def _core_of(model: SeqModel):
        if model._core is None:
            cfg = model.config
            model._core = _core.Core(
                model.weights(), cfg.embed_dim, cfg.hidden_dim, cfg.vocab_size_tgt
            )
        return model._core

    def encode(self, model: SeqModel, source_ids) -> EncodedSource:
        cfg = model.config
        ids = graph.check_source_ids(source_ids, cfg)
        ann, ann_proj, state0 = self._core_of(model).encode(
            np.asarray(ids, dtype=np.int64)
        )
        return EncodedSource(ann, ann_proj, state0)

    def step(self, model: SeqModel, enc: EncodedSource, state, prev_id: int,
             step_index: int = 0):
        if not 0 <= int(prev_id) < model.config.vocab_size_tgt:
            raise IndexError(
                f"target id {prev_id} outside vocabulary of {model.config.vocab_size_tgt}"
            )
        return self._core_of(model).step(
            enc.annotations, enc.ann_proj, np.asarray(state), int(prev_id),
            int(step_index),
        )

    def accumulate_loss_grads(self, model: SeqModel, source_ids, target_ids) -> float:
        cfg = model.config
        src = graph._check_ids(source_ids, cfg.vocab_size_src, "source")
        tgt = graph._check_ids(target_ids, cfg.vocab_size_tgt, "target")
        grads = {pid: p.gradient for pid, p in model.params.items()}
        return self._core_of(model).loss_grads(
            np.asarray(src, dtype=np.int64), np.asarray(tgt, dtype=np.int64), grads
        )


_PURE = os.environ.get("MTHD_PURE_PY", "") not in ("", "0")
_ACTIVE = PyBackend() if (_PURE or _core is None) else CoreBackend()


def active_backend():
    return _ACTIVE


def backend_name() -> str:
    return _ACTIVE.name


def get_backend(name: str):
    """Explicit backend lookup (used by the benchmark and agreement tests)."""
    if name == "pure-python":
        return PyBackend()
    if name == "compiled":
        if _core is None:
            raise RuntimeError("compiled backend unavailable: mthd._core not built")
        return CoreBackend()
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    return _core is not None


def encode_source(model: SeqModel, source_ids) -> EncodedSource:
    return _ACTIVE.encode(model, source_ids)


def advance(model: SeqModel, enc: EncodedSource, state, prev_id: int,
            step_index: int = 0):
    return _ACTIVE.step(model, enc, state, prev_id, step_index)


def accumulate_loss_grads(model: SeqModel, source_ids, target_ids) -> float:
    return _ACTIVE.accumulate_loss_grads(model, source_ids, target_ids)
