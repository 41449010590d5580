"""Scored output sequences."""

from dataclasses import dataclass

from ..textdata import detokenize


@dataclass(frozen=True)
class Hypothesis:
    """A complete token sequence (BOS..EOS) with its score.

    score is the sum of token log-probs over emitted tokens (everything
    after BOS, EOS included); normalized_score divides by that count.
    text is the detokenized rendering; empty when no vocabulary was
    supplied (model-level searches).
    """

    ids: tuple
    text: str
    score: float
    normalized_score: float

    @classmethod
    def from_ids(cls, ids, score: float, vocab=None, text=None) -> "Hypothesis":
        ids = tuple(int(i) for i in ids)
        emitted = max(len(ids) - 1, 1)
        if text is None:
            text = detokenize(ids, vocab) if vocab is not None else ""
        return cls(ids, text, score, score / emitted)
