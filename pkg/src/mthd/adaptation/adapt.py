"""Incremental updates from one validated sentence pair.

Runs a small, fixed number of SGD steps on the single pair. A divergence
guard restores the pre-adaptation parameters whenever a non-finite loss
shows up: a live service must never serve a poisoned model.
"""

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from ..errors import ConfigError, DivergenceError, SampleError
from ..numerics import clip_gradients, sgd_step
from ..seq2seq import runtime
from ..seq2seq.model import SeqModel
from ..textdata import Vocabulary, tokenize


@dataclass(frozen=True)
class AdaptationConfig:
    steps: int = 3
    learning_rate: float = 0.01

    def __post_init__(self):
        if self.steps < 0:
            raise ConfigError(f"steps must be >= 0, got {self.steps}")
        if not self.learning_rate > 0.0:
            raise ConfigError(
                f"learning rate must be positive, got {self.learning_rate}"
            )


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass(frozen=True)
class ValidatedSample:
    source: str
    target: str
    task: str  # modernize | normalize
    timestamp: str = field(default_factory=utc_now_iso)

    def __post_init__(self):
        if not self.source or not self.target:
            raise SampleError("validated sample needs nonempty source and target")


@dataclass(frozen=True)
class AdaptReport:
    """losses[0] is the loss before any update; losses[i] the loss after i
    steps; len(losses) == steps + 1."""

    losses: list
    steps: int


def adapt(
    model: SeqModel,
    src_vocab: Vocabulary,
    tgt_vocab: Vocabulary,
    sample: ValidatedSample,
    config: AdaptationConfig = AdaptationConfig(),
) -> AdaptReport:
    """config.steps SGD iterations on the pair; caller holds exclusive
    access to the model. Vocabularies are frozen: unseen tokens map to UNK.
    """
    try:
        src_ids = tokenize(sample.source, src_vocab)
        tgt_ids = tokenize(sample.target, tgt_vocab)
    except Exception as exc:  # tokenization failure surfaces as sample error
        raise SampleError(f"cannot tokenize sample: {exc}") from exc

    params = model.param_list()
    for p in params:
        p.zero_grad()
    snapshot = model.copy_values()

    def bail(reason):
        model.restore_values(snapshot)
        for p in params:
            p.zero_grad()
        raise DivergenceError(f"adaptation aborted ({reason}); parameters restored")

    losses = []
    for _ in range(config.steps):
        loss = runtime.accumulate_loss_grads(model, src_ids, tgt_ids)
        if not math.isfinite(loss):
            bail("non-finite loss")
        losses.append(loss)
        clip_gradients(params)
        sgd_step(params, config.learning_rate)
        if not all(np.isfinite(p.value.data).all() for p in params):
            bail("non-finite parameters")

    final = runtime.accumulate_loss_grads(model, src_ids, tgt_ids)
    for p in params:
        p.zero_grad()
    if not math.isfinite(final):
        bail("non-finite loss")
    losses.append(final)
    return AdaptReport(losses=losses, steps=config.steps)
