"""Prefix-constrained search: the validated characters force the decode.

The feedback prefix segments into forced token ids plus (word mode only) a
trailing in-progress fragment. Forced ids are teacher-forced through the
decoder at their true log-probs; the fragment restricts the next token to
those whose string extends it (equality included: the user may have typed
a complete word without the trailing space); everything after is free beam
search. The emitted text always begins with the feedback bytes verbatim:
forced positions are rendered from the feedback itself, so unknown
characters or words survive as typed even when the model saw UNK.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConstraintTooLongError
from ..seq2seq import runtime
from ..seq2seq.model import SeqModel
from ..textdata import BOS_ID, EOS_ID, PAD_ID, UNK_ID, Vocabulary
from ..textdata.vocab import RESERVED_TOKENS
from .hypothesis import Hypothesis
from .search import _Item, _beam_from, beam_search, default_max_len

NEG_INF = float("-inf")


@dataclass(frozen=True)
class Feedback:
    """The validated characters, including the user's correction."""

    prefix_chars: str


def segment_feedback(feedback: Feedback, vocab: Vocabulary):
    """Split the prefix into forced token ids and a trailing fragment.

    Char mode: every character becomes a forced id (unknown chars force
    UNK), no fragment. Word mode: whitespace-terminated words force their
    ids; a trailing partial word becomes the fragment. Words that would
    collide with reserved token strings force UNK.
    """
    prefix = feedback.prefix_chars
    if vocab.mode == "char":
        return [_force_id(c, vocab) for c in prefix], ""
    words = prefix.split()
    if not words:
        return [], ""
    if prefix[-1].isspace():
        complete, fragment = words, ""
    else:
        complete, fragment = words[:-1], words[-1]
    return [_force_id(w, vocab) for w in complete], fragment


def _force_id(token: str, vocab: Vocabulary) -> int:
    tid = vocab.encode_token(token)
    return tid if tid >= len(RESERVED_TOKENS) else UNK_ID


def teacher_force(model: SeqModel, enc, forced_ids):
    """Force ids through the decoder, accumulating their true log-probs."""
    state = enc.state0
    ids = (BOS_ID,)
    score = 0.0
    for step_index, fid in enumerate(forced_ids):
        state, logprobs = runtime.advance(model, enc, state, ids[-1], step_index)
        score += float(logprobs[fid])
        ids = ids + (int(fid),)
    return state, ids, score


def constrained_next_distribution(
    logprobs: np.ndarray, fragment: str, vocab: Vocabulary
) -> np.ndarray:
    """Mask the distribution to tokens extending the fragment.

    Tokens whose string starts with the fragment keep their scores, all
    others drop to -inf; with no match only UNK stays live (the fragment
    is rendered literally at detokenization).
    """
    if not fragment:
        raise ValueError("fragment must be nonempty")
    masked = np.full_like(logprobs, NEG_INF)
    any_match = False
    for tid in range(len(RESERVED_TOKENS), logprobs.shape[0]):
        if vocab.token_of(tid).startswith(fragment):
            masked[tid] = logprobs[tid]
            any_match = True
    if not any_match:
        masked[UNK_ID] = logprobs[UNK_ID]
    return masked


def prefix_constrained_search(
    model: SeqModel,
    source_ids,
    feedback: Feedback,
    beam_width: int = 6,
    max_len: int | None = None,
    vocab: Vocabulary | None = None,
    length_norm: bool = True,
) -> Hypothesis:
    """Best hypothesis whose text starts with the feedback, byte for byte.

    Empty feedback reduces exactly to beam_search.
    """
    if vocab is None:
        raise ValueError("prefix_constrained_search needs the target vocabulary")
    prefix = feedback.prefix_chars
    if prefix == "":
        if max_len is None:
            max_len = default_max_len(source_ids)
        return beam_search(model, source_ids, beam_width, max_len, length_norm, vocab)[0]

    forced_ids, fragment = segment_feedback(feedback, vocab)
    budget_needed = len(forced_ids) + (1 if fragment else 0)
    if max_len is None:
        # leave room for the constraint plus at least one free token and EOS
        max_len = max(default_max_len(source_ids), budget_needed + 2)
    if budget_needed + 1 > max_len:  # the EOS slot is part of the budget
        raise ConstraintTooLongError(
            f"feedback needs {budget_needed} tokens plus EOS but max_len is {max_len}"
        )

    enc = runtime.encode_source(model, source_ids)
    state, ids, score = teacher_force(model, enc, forced_ids)

    if fragment:
        state, logprobs = runtime.advance(model, enc, state, ids[-1], len(ids) - 1)
        masked = constrained_next_distribution(logprobs, fragment, vocab)
        order = np.argsort(-masked, kind="stable")
        seeds = []
        for tok in order[: beam_width]:
            tok = int(tok)
            if masked[tok] == NEG_INF:
                break
            seeds.append(_Item(score + float(masked[tok]), ids + (tok,), state))
    else:
        seeds = [_Item(score, ids, state)]

    finished = _beam_from(model, enc, seeds, beam_width, max_len, length_norm)
    best_score, best_ids = finished[0]
    n_forced = 1 + len(forced_ids) + (1 if fragment else 0)  # BOS + constraint
    text = _render(prefix, fragment, best_ids, n_forced, vocab)
    return Hypothesis.from_ids(best_ids, best_score, vocab=None, text=text)


def _render(prefix: str, fragment: str, ids, n_forced: int, vocab: Vocabulary) -> str:
    """prefix bytes verbatim + the completing token's tail + free tokens."""
    completion_tail = ""
    if fragment:
        completing = ids[n_forced - 1]
        if completing != UNK_ID:
            completion_tail = vocab.token_of(completing)[len(fragment):]
    free = [
        vocab.token_of(t)
        for t in ids[n_forced:]
        if t not in (PAD_ID, BOS_ID, EOS_ID)
    ]
    if vocab.mode == "char":
        return prefix + completion_tail + "".join(free)
    rest = " ".join(free)
    out = prefix + completion_tail
    if rest:
        if out and not out[-1].isspace():
            out += " "
        out += rest
    return out
