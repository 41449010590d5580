"""Exception types shared across the package."""


class MthdError(Exception):
    """Base class for all library errors."""


class ShapeError(MthdError, ValueError):
    """Operands have incompatible shapes."""


class ConfigError(MthdError, ValueError):
    """Invalid configuration value."""


class VocabIndexError(MthdError, IndexError):
    """Token id outside the vocabulary."""


class RuleParseError(MthdError, ValueError):
    """Malformed antiquation rule; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ConstraintTooLongError(MthdError, ValueError):
    """Feedback segments into more forced tokens than the decode budget."""


class CheckpointFormatError(MthdError, ValueError):
    """Checkpoint file is corrupt or not a checkpoint."""


class UnsupportedVersionError(CheckpointFormatError):
    """Checkpoint format version not supported by this build."""


class SampleError(MthdError, ValueError):
    """Validated sample cannot be tokenized or is malformed."""


class DivergenceError(MthdError, RuntimeError):
    """Adaptation produced a non-finite loss; parameters were restored."""
