"""Attention encoder-decoder: the model behind every hypothesis."""

from .model import ModelConfig, SeqModel, MAX_SOURCE_TOKENS
from .graph import encode, decoder_start, decoder_step, sequence_nll, ann_projection
from . import runtime

__all__ = [
    "ModelConfig",
    "SeqModel",
    "MAX_SOURCE_TOKENS",
    "encode",
    "decoder_start",
    "decoder_step",
    "sequence_nll",
    "ann_projection",
    "runtime",
]
