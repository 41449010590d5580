"""Greedy and beam search.

Search space: sequences of at most max_len emitted tokens (EOS included)
that end in EOS, every token scored by the model. When a partial
hypothesis reaches the last budget position only EOS may be emitted, so
all returned scores are fully model-scored and comparable. max_len = 0
degenerates to the empty hypothesis BOS,EOS with score 0.

Determinism: ties break by score, then lexicographically lower token ids,
then shorter sequence (tuple comparison gives the last two for free).
"""

import numpy as np

from ..seq2seq import runtime
from ..seq2seq.model import SeqModel
from ..textdata import BOS_ID, EOS_ID
from .hypothesis import Hypothesis


def default_max_len(source_ids) -> int:
    return 2 * len(source_ids) + 5


class _Item:
    """Live partial hypothesis inside a beam."""

    __slots__ = ("score", "ids", "state")

    def __init__(self, score, ids, state):
        self.score = score
        self.ids = ids
        self.state = state

    def key(self):
        return (-self.score, self.ids)


def greedy_decode(model: SeqModel, source_ids, max_len: int, vocab=None) -> Hypothesis:
    """Pick the argmax token at every step (ties to the lowest id)."""
    if max_len < 0:
        raise ValueError(f"max_len must be >= 0, got {max_len}")
    if max_len == 0:
        return Hypothesis.from_ids((BOS_ID, EOS_ID), 0.0, vocab)
    enc = runtime.encode_source(model, source_ids)
    state = enc.state0
    ids = [BOS_ID]
    score = 0.0
    for emitted in range(max_len):
        state, logprobs = runtime.advance(model, enc, state, ids[-1], emitted)
        if emitted == max_len - 1:
            tok = EOS_ID
        else:
            tok = int(np.argmax(logprobs))  # first max = lowest id on ties
        score += float(logprobs[tok])
        ids.append(tok)
        if tok == EOS_ID:
            break
    return Hypothesis.from_ids(ids, score, vocab)


def _beam_from(model, enc, seeds, beam_width: int, max_len: int, length_norm: bool):
    """Beam expansion from seed items; returns finished hypotheses sorted
    by the final ranking criterion (normalized or raw score).

    EOS competes like any token: the top-width candidates survive each
    step, survivors ending in EOS retire from the beam. This makes
    beam_width=1 coincide with greedy decoding by construction.
    """
    live = sorted(seeds, key=_Item.key)[:beam_width]
    finished = []  # (score, ids)

    while live:
        emitted = len(live[0].ids) - 1
        if emitted >= max_len:
            break
        last_position = emitted + 1 == max_len
        pool = []
        for item in live:
            state, logprobs = runtime.advance(
                model, enc, item.state, item.ids[-1], emitted
            )
            if last_position:  # the budget's final token must be EOS
                pool.append(
                    _Item(item.score + float(logprobs[EOS_ID]), item.ids + (EOS_ID,), None)
                )
                continue
            # per-item top-width slice is enough: anything below it cannot
            # make the global top width (stable sort ties to lower ids)
            order = np.argsort(-logprobs, kind="stable")[:beam_width]
            for tok in order:
                tok = int(tok)
                pool.append(
                    _Item(item.score + float(logprobs[tok]), item.ids + (tok,), state)
                )
        pool.sort(key=_Item.key)
        survivors = pool[:beam_width]
        live = []
        for s in survivors:
            if s.ids[-1] == EOS_ID:
                finished.append((s.score, s.ids))
            else:
                live.append(s)
        if not length_norm and live and finished:
            best_done = min(finished, key=lambda f: (-f[0], f[1]))
            if best_done[0] >= live[0].score:
                break  # no extension can beat it: log-probs only decrease

    def final_key(f):
        score, ids = f
        if length_norm:
            return (-score / max(len(ids) - 1, 1), ids)
        return (-score, ids)

    finished.sort(key=final_key)
    return finished[:beam_width]


def beam_search(
    model: SeqModel,
    source_ids,
    beam_width: int = 6,
    max_len: int | None = None,
    length_norm: bool = True,
    vocab=None,
) -> list:
    """Standard beam search; best hypothesis first."""
    if beam_width < 1:
        raise ValueError(f"beam_width must be >= 1, got {beam_width}")
    if max_len is None:
        max_len = default_max_len(source_ids)
    if max_len < 0:
        raise ValueError(f"max_len must be >= 0, got {max_len}")
    if max_len == 0:
        return [Hypothesis.from_ids((BOS_ID, EOS_ID), 0.0, vocab)]
    enc = runtime.encode_source(model, source_ids)
    seeds = [_Item(0.0, (BOS_ID,), enc.state0)]
    finished = _beam_from(model, enc, seeds, beam_width, max_len, length_norm)
    return [Hypothesis.from_ids(ids, score, vocab) for score, ids in finished]
