"""Vocabularies, tokenization, parallel-corpus I/O and the synthetic
old-spelling corpus generator."""

from .vocab import (
    PAD_ID,
    BOS_ID,
    EOS_ID,
    UNK_ID,
    RESERVED_TOKENS,
    Vocabulary,
    build_vocab,
    tokenize,
    detokenize,
    tokens_of,
)
from .corpus import ParallelCorpus, load_parallel, write_lines, read_lines
from .rules import Rule, parse_rules, load_rules, default_rules
from .synth import gen_synthetic_corpus, gen_modern_lines, default_word_list

__all__ = [
    "PAD_ID",
    "BOS_ID",
    "EOS_ID",
    "UNK_ID",
    "RESERVED_TOKENS",
    "Vocabulary",
    "build_vocab",
    "tokenize",
    "detokenize",
    "tokens_of",
    "ParallelCorpus",
    "load_parallel",
    "write_lines",
    "read_lines",
    "Rule",
    "parse_rules",
    "load_rules",
    "default_rules",
    "gen_synthetic_corpus",
    "gen_modern_lines",
    "default_word_list",
]
