"""Server configuration file (JSON).

Example::

    {
      "port": 8077,
      "session_ttl_seconds": 1800,
      "cors_origins": ["http://localhost:5173"],
      "validated_log": "validated.jsonl",
      "tasks": {
        "normalize": {
          "checkpoint": "normalize.ckpt",
          "sentences": "sentences_normalize.txt",
          "adapt_steps": 3,
          "adapt_lr": 0.01
        }
      }
    }

The MTHD_CONFIG environment variable overrides the config path given to
``mthd serve``. Relative paths resolve against the config file location.
"""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError

TASK_MODES = {"modernize": "word", "normalize": "char"}


@dataclass(frozen=True)
class TaskConfig:
    checkpoint: str
    sentences: str
    adapt_steps: int = 3
    adapt_lr: float = 0.01


@dataclass(frozen=True)
class ServerConfig:
    tasks: dict
    port: int = 8077
    session_ttl_seconds: float = 1800.0
    cors_origins: list = field(default_factory=list)
    validated_log: str = "validated_samples.jsonl"
    ui_dir: str | None = None


def load_config(path=None) -> ServerConfig:
    """Parse the config file; MTHD_CONFIG wins over the argument."""
    env = os.environ.get("MTHD_CONFIG")
    if env:
        path = env
    if path is None:
        raise ConfigError("no config file: pass --config or set MTHD_CONFIG")
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    base = path.parent

    def resolve(p):
        return str((base / p).resolve()) if not os.path.isabs(p) else p

    tasks = {}
    for name, tc in raw.get("tasks", {}).items():
        if name not in TASK_MODES:
            raise ConfigError(f"unknown task {name!r} in config")
        tasks[name] = TaskConfig(
            checkpoint=resolve(tc["checkpoint"]),
            sentences=resolve(tc["sentences"]),
            adapt_steps=int(tc.get("adapt_steps", 3)),
            adapt_lr=float(tc.get("adapt_lr", 0.01)),
        )
    if not tasks:
        raise ConfigError("config defines no tasks")
    return ServerConfig(
        tasks=tasks,
        port=int(raw.get("port", 8077)),
        session_ttl_seconds=float(raw.get("session_ttl_seconds", 1800.0)),
        cors_origins=list(raw.get("cors_origins", [])),
        validated_log=resolve(raw.get("validated_log", "validated_samples.jsonl")),
        ui_dir=resolve(raw["ui_dir"]) if raw.get("ui_dir") else None,
    )
