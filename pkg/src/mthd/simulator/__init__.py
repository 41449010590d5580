"""Simulated-user evaluation of the interactive loop."""

from .engines import Engine, LocalEngine, HttpEngine
from .simulate import (
    InteractionTrace,
    EffortReport,
    simulate_sentence,
    run_benchmark,
    MODES,
)

__all__ = [
    "Engine",
    "LocalEngine",
    "HttpEngine",
    "InteractionTrace",
    "EffortReport",
    "simulate_sentence",
    "run_benchmark",
    "MODES",
]
