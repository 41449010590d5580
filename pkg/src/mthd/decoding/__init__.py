"""Search over the model's distribution: free and prefix-constrained."""

from .hypothesis import Hypothesis
from .search import greedy_decode, beam_search, default_max_len
from .constrained import (
    Feedback,
    segment_feedback,
    constrained_next_distribution,
    prefix_constrained_search,
)

__all__ = [
    "Hypothesis",
    "greedy_decode",
    "beam_search",
    "default_max_len",
    "Feedback",
    "segment_feedback",
    "constrained_next_distribution",
    "prefix_constrained_search",
]
