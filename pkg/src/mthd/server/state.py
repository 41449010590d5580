"""Server-side state: task models behind reader-writer locks, sessions,
and the validate/adapt path.

Concurrency contract: any number of decode requests may read a task's
model concurrently; a validate-with-learn takes an exclusive lease,
draining in-flight decodes first (writer preference), and queued requests
proceed afterward. Sessions serialize per session id.
"""

import threading
import time
import uuid
from dataclasses import dataclass

from ..adaptation import (
    AdaptationConfig,
    ValidatedSample,
    adapt,
    append_validated,
    checkpoint_bytes,
    fnv1a64,
    load_checkpoint,
)
from ..decoding import Feedback, beam_search, prefix_constrained_search
from ..errors import DivergenceError, MthdError
from ..seq2seq.model import MAX_SOURCE_TOKENS
from ..textdata import read_lines, tokenize
from .config import TASK_MODES, ServerConfig

BEAM_WIDTH = 6


class ApiError(MthdError):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class RWLock:
    """Reader-writer lock, writer preference, FIFO-ish wakeups."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    def acquire_read(self):
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1

    def release_read(self):
        with self._cond:
            self._readers -= 1
            self._cond.notify_all()

    def acquire_write(self):
        with self._cond:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer = True

    def release_write(self):
        with self._cond:
            self._writer = False
            self._cond.notify_all()

    class _Guard:
        def __init__(self, acquire, release):
            self._acquire, self._release = acquire, release

        def __enter__(self):
            self._acquire()

        def __exit__(self, *exc):
            self._release()

    def read(self):
        return RWLock._Guard(self.acquire_read, self.release_read)

    def write(self):
        return RWLock._Guard(self.acquire_write, self.release_write)


class TaskState:
    def __init__(self, name, model, src_vocab, tgt_vocab, sentences, adapt_config):
        self.name = name
        self.model = model
        self.src_vocab = src_vocab
        self.tgt_vocab = tgt_vocab
        self.sentences = sentences
        self.adapt_config = adapt_config
        self.lock = RWLock()
        self._checksum = None
        self._checksum_lock = threading.Lock()

    def checksum(self) -> str:
        """FNV-1a over the current checkpoint bytes, cached until the next
        adaptation."""
        with self._checksum_lock:
            if self._checksum is None:
                with self.lock.read():
                    data = checkpoint_bytes(self.model, self.src_vocab, self.tgt_vocab)
                self._checksum = f"{fnv1a64(data):016x}"
            return self._checksum

    def mark_dirty(self):
        with self._checksum_lock:
            self._checksum = None


@dataclass
class Session:
    session_id: str
    task: str
    source: str
    current_hypothesis: str
    created: float
    last_touched: float
    lock: threading.Lock


class ServerState:
    def __init__(self, config: ServerConfig):
        self.config = config
        self.tasks = {}
        for name, tc in config.tasks.items():
            model, src_vocab, tgt_vocab = load_checkpoint(tc.checkpoint)
            expected = TASK_MODES[name]
            if model.config.mode != expected:
                raise MthdError(
                    f"task {name} needs a {expected}-mode model, "
                    f"checkpoint is {model.config.mode}-mode"
                )
            self.tasks[name] = TaskState(
                name=name,
                model=model,
                src_vocab=src_vocab,
                tgt_vocab=tgt_vocab,
                sentences=read_lines(tc.sentences),
                adapt_config=AdaptationConfig(
                    steps=tc.adapt_steps, learning_rate=tc.adapt_lr
                ),
            )
        self.sessions: dict = {}
        self._sessions_lock = threading.Lock()
        self.log_path = config.validated_log

    # ---- helpers ---------------------------------------------------------

    def _task(self, name) -> TaskState:
        task = self.tasks.get(name)
        if task is None:
            raise ApiError(
                404, "task_unavailable", f"task {name!r} is not configured"
            )
        return task

    def _session(self, session_id) -> Session:
        now = time.monotonic()
        with self._sessions_lock:
            sess = self.sessions.get(session_id)
            if sess and now - sess.last_touched > self.config.session_ttl_seconds:
                del self.sessions[session_id]
                sess = None
            if sess is None:
                raise ApiError(
                    404, "session_not_found", f"unknown or expired session {session_id!r}"
                )
            sess.last_touched = now
            return sess

    def _close_session(self, session_id):
        with self._sessions_lock:
            self.sessions.pop(session_id, None)

    def _check_source_match(self, sess: Session, source):
        if source is not None and source != sess.source:
            raise ApiError(
                409,
                "source_mismatch",
                "request source does not match the session's source sentence",
            )

    # ---- operations ------------------------------------------------------

    def list_sentences(self, task_name) -> list:
        return list(self._task(task_name).sentences)

    def translate(self, task_name, source) -> dict:
        if not source:
            raise ApiError(400, "empty_source", "source sentence is empty")
        task = self._task(task_name)
        src_ids = tokenize(source, task.src_vocab)
        if len(src_ids) > MAX_SOURCE_TOKENS:
            raise ApiError(
                400,
                "source_too_long",
                f"source has {len(src_ids)} tokens, limit {MAX_SOURCE_TOKENS}",
            )
        with task.lock.read():
            hyp = beam_search(
                task.model, src_ids, beam_width=BEAM_WIDTH, vocab=task.tgt_vocab
            )[0]
        sess = Session(
            session_id=uuid.uuid4().hex,
            task=task_name,
            source=source,
            current_hypothesis=hyp.text,
            created=time.monotonic(),
            last_touched=time.monotonic(),
            lock=threading.Lock(),
        )
        with self._sessions_lock:
            self.sessions[sess.session_id] = sess
        return {"session_id": sess.session_id, "hypothesis": hyp.text}

    def correct(self, session_id, prefix, source=None) -> dict:
        if not prefix:
            raise ApiError(400, "empty_prefix", "prefix is empty")
        sess = self._session(session_id)
        with sess.lock:
            self._check_source_match(sess, source)
            task = self._task(sess.task)
            src_ids = tokenize(sess.source, task.src_vocab)
            with task.lock.read():
                hyp = prefix_constrained_search(
                    task.model,
                    src_ids,
                    Feedback(prefix),
                    beam_width=BEAM_WIDTH,
                    vocab=task.tgt_vocab,
                )
            sess.current_hypothesis = hyp.text
        return {"hypothesis": hyp.text}

    def validate(self, session_id, target, learn, source=None) -> dict:
        if not target:
            raise ApiError(400, "empty_target", "target sentence is empty")
        sess = self._session(session_id)
        with sess.lock:
            self._check_source_match(sess, source)
            task = self._task(sess.task)
            sample = ValidatedSample(source=sess.source, target=target, task=sess.task)
            learned = False
            steps = 0
            final_loss = None
            diverged = False
            if learn:
                with task.lock.write():
                    try:
                        report = adapt(
                            task.model,
                            task.src_vocab,
                            task.tgt_vocab,
                            sample,
                            task.adapt_config,
                        )
                        learned = True
                        steps = report.steps
                        final_loss = report.losses[-1]
                    except DivergenceError:
                        diverged = True
                task.mark_dirty()
            append_validated(sample, self.log_path, learned=learned)
            self._close_session(session_id)
        out = {"learned": learned, "steps": steps, "final_loss": final_loss}
        if diverged:
            out["code"] = "adaptation_diverged"
        return out

    def health(self) -> dict:
        loaded = sorted(self.tasks.keys())
        status = "ok" if len(loaded) == 2 else "degraded"
        return {
            "status": status,
            "tasks": loaded,
            "checksums": {name: self.tasks[name].checksum() for name in loaded},
        }
