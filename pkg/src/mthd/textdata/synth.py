"""Deterministic synthetic corpus: modern lines plus their antiquated
spellings, standing in for unavailable historical corpora."""

from importlib import resources

from ..rng import SplitMix64
from .corpus import ParallelCorpus
from .rules import antiquate_line


def default_word_list() -> list:
    """Modern-Spanish word stock shipped with the package."""
    text = (
        resources.files("mthd").joinpath("assets/modern_words_es.txt")
        .read_text(encoding="utf-8")
    )
    return [w for w in text.split("\n") if w and not w.startswith("#")]


def gen_modern_lines(
    n: int,
    seed: int,
    words=None,
    min_words: int = 4,
    max_words: int = 9,
) -> list:
    """n synthetic modern sentences, words drawn iid from the word stock."""
    words = list(words) if words is not None else default_word_list()
    rng = SplitMix64(seed)
    lines = []
    for _ in range(n):
        k = min_words + rng.randint(max_words - min_words + 1)
        lines.append(" ".join(words[rng.randint(len(words))] for _ in range(k)))
    return lines


def gen_synthetic_corpus(modern_lines, rules, seed: int) -> ParallelCorpus:
    """Antiquated source side paired with the unmodified modern target side.

    Deterministic for fixed (lines, rules, seed): one PRNG stream consumed
    line by line in order.
    """
    rng = SplitMix64(seed)
    pairs = [(antiquate_line(line, rules, rng), line) for line in modern_lines]
    return ParallelCorpus(pairs)
