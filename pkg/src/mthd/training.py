"""Offline training: plain SGD over a parallel corpus, one pair at a time."""

import logging
import math
import time

from .errors import MthdError
from .numerics import clip_gradients, sgd_step
from .rng import SplitMix64
from .seq2seq import ModelConfig, runtime
from .seq2seq.model import MAX_SOURCE_TOKENS, init_model
from .textdata import ParallelCorpus, build_vocab, tokenize

logger = logging.getLogger(__name__)

MIN_FREQ_DEFAULTS = {"char": 1, "word": 2}


def build_task_vocabs(corpus: ParallelCorpus, mode: str, min_freq: int | None = None):
    mf = MIN_FREQ_DEFAULTS[mode] if min_freq is None else min_freq
    src_vocab = build_vocab(corpus.sources(), mode, mf)
    tgt_vocab = build_vocab(corpus.targets(), mode, mf)
    return src_vocab, tgt_vocab


def train_model(
    corpus: ParallelCorpus,
    mode: str,
    epochs: int = 6,
    learning_rate: float = 0.3,
    embed_dim: int = 64,
    hidden_dim: int = 128,
    seed: int = 0,
    min_freq: int | None = None,
):
    """Train a fresh model; returns (model, src_vocab, tgt_vocab, history).

    Gradients are normalized per target token before clipping, so the
    step size does not scale with sentence length. history is the mean
    per-pair loss of each epoch. Deterministic for a fixed
    corpus/config/seed (seeded shuffling, no other randomness).
    """
    if len(corpus) == 0:
        raise MthdError("cannot train on an empty corpus")
    src_vocab, tgt_vocab = build_task_vocabs(corpus, mode, min_freq)
    config = ModelConfig(
        vocab_size_src=len(src_vocab),
        vocab_size_tgt=len(tgt_vocab),
        embed_dim=embed_dim,
        hidden_dim=hidden_dim,
        mode=mode,
        seed=seed,
    )
    model = init_model(config)
    encoded = [
        (tokenize(s, src_vocab), tokenize(t, tgt_vocab))
        for s, t in corpus
        if len(tokenize(s, src_vocab)) <= MAX_SOURCE_TOKENS
    ]
    params = model.param_list()
    rng = SplitMix64(seed ^ 0x5EED)
    order = list(range(len(encoded)))
    history = []
    for epoch in range(epochs):
        rng.shuffle(order)
        total = 0.0
        chars = 0
        t0 = time.perf_counter()
        for idx in order:
            src_ids, tgt_ids = encoded[idx]
            loss = runtime.accumulate_loss_grads(model, src_ids, tgt_ids)
            if not math.isfinite(loss):
                raise MthdError(f"training diverged at epoch {epoch + 1}")
            total += loss
            chars += len(tgt_ids) - 1
            inv = 1.0 / (len(tgt_ids) - 1)
            for p in params:
                p.gradient *= inv
            clip_gradients(params)
            sgd_step(params, learning_rate)
        mean = total / len(encoded)
        history.append(mean)
        logger.info(
            "epoch %d/%d: mean loss %.4f (%.3f/token), %.1fs",
            epoch + 1, epochs, mean, total / max(chars, 1), time.perf_counter() - t0,
        )
    return model, src_vocab, tgt_vocab, history
