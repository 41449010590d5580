"""Differentiable forward passes built on the numerics tape.

This is the reference path: every quantity here is recorded, so gradients
come from the generic backward sweep and are checked against finite
differences. The compiled kernels must agree with these functions.

Recurrent cell: single-layer GRU,
    z = sig(gi_z + gh_z),  r = sig(gi_r + gh_r),
    n = tanh(gi_n + r * gh_n),  h' = (1 - z) * n + z * h
with gi = x @ w_x + b_x and gh = h @ w_h + b_h (reset gate applied after
the hidden matmul, so both matmuls pack all three gates).

Attention is additive: score_t = v . tanh(ann_proj_t + state @ w_state)
plus a fixed Gaussian location prior centered one-past the decoder step
index, with ann_proj = annotations @ w_ann + bias precomputed per source
sentence. The prior encodes the near-monotone alignment of spelling
rewrites; without it, desk-scale plain SGD cannot bootstrap alignment out
of the uniform-attention regime in any reasonable number of epochs.
"""

import numpy as np

from ..errors import MthdError, ShapeError
from ..numerics import Tape, Tensor, ops
from .model import MAX_SOURCE_TOKENS, SeqModel

ATTENTION_PRIOR_SIGMA = 4.0


def location_prior(t_len: int, step_index: int) -> np.ndarray:
    """Score offsets favoring source position step_index + 1 (both sides
    carry BOS at position 0, so the identity alignment is the diagonal)."""
    centre = step_index + 1
    offs = (np.arange(t_len) - centre) / ATTENTION_PRIOR_SIGMA
    return -offs * offs


def _check_ids(ids, vocab_size: int, what: str) -> list:
    ids = [int(i) for i in ids]
    for i in ids:
        if not 0 <= i < vocab_size:
            raise IndexError(f"{what} id {i} outside vocabulary of {vocab_size}")
    return ids


def check_source_ids(source_ids, cfg) -> list:
    """Range/length validation shared by every encode implementation."""
    ids = _check_ids(source_ids, cfg.vocab_size_src, "source")
    if len(ids) < 2:
        raise ShapeError(f"source must include BOS/EOS, got {len(ids)} tokens")
    if len(ids) > MAX_SOURCE_TOKENS:
        raise MthdError(
            f"source has {len(ids)} tokens, above the {MAX_SOURCE_TOKENS} limit"
        )
    return ids


def _gru_step(tape: Tape, params, cell: str, x, h):
    """One GRU step; x is (1 x din), h is (1 x hidden)."""
    hidden = params[f"{cell}.w_h"].value.shape[0]
    gi = ops.add(tape, ops.matmul(tape, x, params[f"{cell}.w_x"]), params[f"{cell}.b_x"])
    gh = ops.add(tape, ops.matmul(tape, h, params[f"{cell}.w_h"]), params[f"{cell}.b_h"])
    return _gru_combine(tape, gi, gh, h, hidden)


def _gru_combine(tape: Tape, gi, gh, h, hidden: int):
    z = ops.sigmoid(
        tape, ops.add(tape, ops.slice_cols(tape, gi, 0, hidden), ops.slice_cols(tape, gh, 0, hidden))
    )
    r = ops.sigmoid(
        tape,
        ops.add(
            tape,
            ops.slice_cols(tape, gi, hidden, 2 * hidden),
            ops.slice_cols(tape, gh, hidden, 2 * hidden),
        ),
    )
    n = ops.tanh(
        tape,
        ops.add(
            tape,
            ops.slice_cols(tape, gi, 2 * hidden, 3 * hidden),
            ops.mul(tape, r, ops.slice_cols(tape, gh, 2 * hidden, 3 * hidden)),
        ),
    )
    return ops.add(
        tape, ops.mul(tape, ops.affine(tape, z, -1.0, 1.0), n), ops.mul(tape, z, h)
    )


def encode(tape: Tape, model: SeqModel, source_ids) -> Tensor:
    """Bidirectional encoder states per source position, (T x 2*hidden)."""
    cfg = model.config
    ids = check_source_ids(source_ids, cfg)
    params = model.params
    t_len = len(ids)
    h = cfg.hidden_dim
    x = ops.gather_rows(tape, params["src_embed"], ids)  # T x d

    states = {}
    for cell, order in (("enc_fwd", range(t_len)), ("enc_bwd", range(t_len - 1, -1, -1))):
        gi_all = ops.add(
            tape, ops.matmul(tape, x, params[f"{cell}.w_x"]), params[f"{cell}.b_x"]
        )
        state = Tensor(np.zeros((1, h)))
        out = [None] * t_len
        for t in order:
            gi = ops.row(tape, gi_all, t)
            gh = ops.add(
                tape,
                ops.matmul(tape, state, params[f"{cell}.w_h"]),
                params[f"{cell}.b_h"],
            )
            state = _gru_combine(tape, gi, gh, state, h)
            out[t] = state
        states[cell] = out

    fwd = ops.stack_rows(tape, states["enc_fwd"])
    bwd = ops.stack_rows(tape, states["enc_bwd"])
    return ops.concat_cols(tape, fwd, bwd)


def ann_projection(tape: Tape, model: SeqModel, annotations) -> Tensor:
    """State-independent half of the attention scores, (T x att)."""
    p = model.params
    return ops.add(tape, ops.matmul(tape, annotations, p["att.w_ann"]), p["att.bias"])


def decoder_start(tape: Tape, model: SeqModel, annotations) -> Tensor:
    """Initial decoder state: projected mean annotation, (1 x hidden)."""
    p = model.params
    mean = ops.mean_rows(tape, annotations)
    return ops.tanh(
        tape, ops.add(tape, ops.matmul(tape, mean, p["init.w"]), p["init.b"])
    )


def _attention_context(tape: Tape, model: SeqModel, state, annotations, ann_proj, step_index):
    p = model.params
    query = ops.matmul(tape, state, p["att.w_state"])  # 1 x a
    act = ops.tanh(tape, ops.add(tape, ann_proj, query))  # T x a
    v_col = ops.reshape(tape, p["att.v"], (-1, 1))
    content = ops.reshape(tape, ops.matmul(tape, act, v_col), (-1,))  # T
    prior = Tensor(location_prior(annotations.shape[0], step_index))
    scores = ops.add(tape, content, prior)
    alphas = ops.softmax(tape, scores)
    alphas_row = ops.reshape(tape, alphas, (1, -1))
    context = ops.matmul(tape, alphas_row, annotations)  # 1 x 2h
    return context, alphas


def decoder_step(
    tape: Tape, model: SeqModel, state, prev_id: int, annotations, ann_proj=None,
    step_index: int = 0,
):
    """One decoding step: (new state (1 x h), log-prob vector (V_tgt,)).

    step_index is the count of already-emitted target tokens; it centres
    the attention location prior.
    """
    cfg = model.config
    p = model.params
    if not 0 <= int(prev_id) < cfg.vocab_size_tgt:
        raise IndexError(
            f"target id {prev_id} outside vocabulary of {cfg.vocab_size_tgt}"
        )
    if ann_proj is None:
        ann_proj = ann_projection(tape, model, annotations)
    context, _ = _attention_context(tape, model, state, annotations, ann_proj, step_index)
    emb = ops.gather_rows(tape, p["tgt_embed"], [int(prev_id)])  # 1 x d
    x = ops.concat_cols(tape, emb, context)
    new_state = _gru_step(tape, p, "dec", x, state)
    logits = ops.add(tape, ops.matmul(tape, new_state, p["out.w"]), p["out.b"])
    logprobs = ops.log_softmax(tape, ops.reshape(tape, logits, (-1,)))
    return new_state, logprobs


def step_logits(tape: Tape, model: SeqModel, state, prev_id: int, annotations, ann_proj,
                step_index: int):
    """decoder_step without the final normalization (training path)."""
    p = model.params
    context, _ = _attention_context(tape, model, state, annotations, ann_proj, step_index)
    emb = ops.gather_rows(tape, p["tgt_embed"], [int(prev_id)])
    x = ops.concat_cols(tape, emb, context)
    new_state = _gru_step(tape, p, "dec", x, state)
    logits = ops.add(tape, ops.matmul(tape, new_state, p["out.w"]), p["out.b"])
    return new_state, ops.reshape(tape, logits, (-1,))


def sequence_nll(tape: Tape, model: SeqModel, source_ids, target_ids) -> Tensor:
    """Teacher-forced negative log-likelihood, summed over target positions.

    target_ids must include BOS and EOS; every position after BOS is scored.
    """
    cfg = model.config
    tgt = _check_ids(target_ids, cfg.vocab_size_tgt, "target")
    if len(tgt) < 2:
        raise ShapeError(f"target must include BOS/EOS, got {len(tgt)} tokens")
    annotations = encode(tape, model, source_ids)
    ann_proj = ann_projection(tape, model, annotations)
    state = decoder_start(tape, model, annotations)
    loss = None
    for pos in range(1, len(tgt)):
        state, logits = step_logits(
            tape, model, state, tgt[pos - 1], annotations, ann_proj, pos - 1
        )
        ce = ops.cross_entropy(tape, logits, tgt[pos])
        loss = ce if loss is None else ops.add_scalar(tape, loss, ce)
    return loss
