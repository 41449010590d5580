"""HTTP service: per-task models, session table, online adaptation."""

from .config import ServerConfig, TaskConfig, load_config
from .state import ServerState, Session, TaskState
from .app import create_app

__all__ = [
    "ServerConfig",
    "TaskConfig",
    "load_config",
    "ServerState",
    "Session",
    "TaskState",
    "create_app",
]
