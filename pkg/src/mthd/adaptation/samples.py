"""Validated-sample log: one JSON object per line, appendable and
replayable. Replaying the learned records over the base checkpoint
reproduces the served model exactly (adaptation is deterministic)."""

import json
from pathlib import Path

from ..errors import MthdError
from .adapt import AdaptationConfig, ValidatedSample, adapt


def append_validated(sample: ValidatedSample, log_path, learned: bool) -> None:
    """Append one record. The learned flag records whether the sample also
    updated the model, which replay needs to reproduce served parameters."""
    record = {
        "task": sample.task,
        "source": sample.source,
        "target": sample.target,
        "timestamp": sample.timestamp,
        "learned": bool(learned),
    }
    with open(log_path, "a", encoding="utf-8") as f:
        f.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_log(log_path) -> list:
    path = Path(log_path)
    if not path.exists():
        return []
    records = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").split("\n"), 1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise MthdError(f"{log_path}:{line_no}: malformed log record: {exc}") from exc
    return records


def replay_log(
    model,
    src_vocab,
    tgt_vocab,
    log_path,
    config: AdaptationConfig = AdaptationConfig(),
    task: str | None = None,
) -> int:
    """Re-adapt the model from the log's learned records, in order.

    Returns the number of records applied. Filter by task when one log
    mixes tasks.
    """
    applied = 0
    for rec in read_log(log_path):
        if not rec.get("learned"):
            continue
        if task is not None and rec.get("task") != task:
            continue
        sample = ValidatedSample(
            source=rec["source"],
            target=rec["target"],
            task=rec["task"],
            timestamp=rec["timestamp"],
        )
        adapt(model, src_vocab, tgt_vocab, sample, config)
        applied += 1
    return applied
