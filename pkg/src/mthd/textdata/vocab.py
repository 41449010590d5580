"""Token vocabularies with char and word granularity.

Ids 0..3 are reserved for PAD, BOS, EOS, UNK in that order. Word mode
splits on Unicode whitespace; char mode emits one token per Unicode scalar
value, spaces included.
"""

from collections import Counter
from typing import Iterable

from ..errors import ConfigError, VocabIndexError

PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3
RESERVED_TOKENS = ("<pad>", "<bos>", "<eos>", "<unk>")

MODES = ("char", "word")


def split_tokens(text: str, mode: str) -> list:
    if mode == "word":
        return text.split()
    if mode == "char":
        return list(text)
    raise ConfigError(f"unknown vocabulary mode {mode!r}")


class Vocabulary:
    """Bijection between token strings and contiguous ids."""

    def __init__(self, mode: str, content_tokens: Iterable[str]):
        if mode not in MODES:
            raise ConfigError(f"unknown vocabulary mode {mode!r}")
        self.mode = mode
        self._tokens = list(RESERVED_TOKENS)
        self._ids: dict = {t: i for i, t in enumerate(self._tokens)}
        for tok in content_tokens:
            if "\n" in tok:
                raise ConfigError(f"token {tok!r} contains the corpus line separator")
            if tok in self._ids:
                raise ConfigError(f"duplicate token {tok!r}")
            self._ids[tok] = len(self._tokens)
            self._tokens.append(tok)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def encode_token(self, token: str) -> int:
        return self._ids.get(token, UNK_ID)

    def token_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self._tokens):
            raise VocabIndexError(
                f"id {token_id} outside vocabulary of {len(self._tokens)}"
            )
        return self._tokens[token_id]

    def content_tokens(self) -> list:
        return self._tokens[4:]

    def to_dict(self) -> dict:
        return {"mode": self.mode, "tokens": self.content_tokens()}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(d["mode"], d["tokens"])


def build_vocab(lines: Iterable[str], mode: str, min_freq: int = 1) -> Vocabulary:
    """Vocabulary of every token with frequency >= min_freq.

    Order is deterministic: frequency descending, then lexicographic.
    An empty corpus yields just the reserved tokens.
    """
    if min_freq < 1:
        raise ConfigError(f"min_freq must be positive, got {min_freq}")
    counts = Counter()
    for line in lines:
        counts.update(split_tokens(line, mode))
    kept = sorted(
        (t for t, c in counts.items() if c >= min_freq and "\n" not in t),
        key=lambda t: (-counts[t], t),
    )
    return Vocabulary(mode, kept)


def tokenize(text: str, vocab: Vocabulary) -> list:
    """BOS + token ids + EOS; unknown tokens map to UNK."""
    ids = [vocab.encode_token(t) for t in split_tokens(text, vocab.mode)]
    return [BOS_ID] + ids + [EOS_ID]


def tokens_of(ids: Iterable[int], vocab: Vocabulary) -> list:
    """Token strings for ids, with PAD/BOS/EOS stripped."""
    out = []
    for i in ids:
        tok = vocab.token_of(i)
        if i in (PAD_ID, BOS_ID, EOS_ID):
            continue
        out.append(tok)
    return out


def detokenize(ids: Iterable[int], vocab: Vocabulary) -> str:
    """Inverse of tokenize on UNK-free text."""
    toks = tokens_of(ids, vocab)
    return " ".join(toks) if vocab.mode == "word" else "".join(toks)
