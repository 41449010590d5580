"""Parallel corpus loading: two aligned UTF-8 files, one sentence per line."""

from dataclasses import dataclass, field
from pathlib import Path

from ..errors import MthdError


@dataclass
class ParallelCorpus:
    """Ordered (source, target) sentence pairs."""

    pairs: list = field(default_factory=list)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def sources(self) -> list:
        return [s for s, _ in self.pairs]

    def targets(self) -> list:
        return [t for _, t in self.pairs]


def read_lines(path) -> list:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def write_lines(path, lines) -> None:
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def load_parallel(src_path, tgt_path) -> ParallelCorpus:
    """Align two sentence files by line number.

    Raises on unequal line counts; pairs where either side is blank are
    dropped so no empty lines survive loading.
    """
    src = read_lines(src_path)
    tgt = read_lines(tgt_path)
    if len(src) != len(tgt):
        raise MthdError(
            f"corpus sides differ: {len(src)} lines in {src_path}, "
            f"{len(tgt)} in {tgt_path}"
        )
    pairs = [
        (s.strip(), t.strip())
        for s, t in zip(src, tgt)
        if s.strip() and t.strip()
    ]
    return ParallelCorpus(pairs)
