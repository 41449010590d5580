"""Online learning on validated hypotheses plus checkpoint persistence."""

from .adapt import AdaptationConfig, AdaptReport, ValidatedSample, adapt
from .checkpoint import (
    save_checkpoint,
    load_checkpoint,
    checkpoint_bytes,
    fnv1a64,
    FORMAT_VERSION,
)
from .samples import append_validated, read_log, replay_log

__all__ = [
    "AdaptationConfig",
    "AdaptReport",
    "ValidatedSample",
    "adapt",
    "save_checkpoint",
    "load_checkpoint",
    "checkpoint_bytes",
    "fnv1a64",
    "FORMAT_VERSION",
    "append_validated",
    "read_log",
    "replay_log",
]
