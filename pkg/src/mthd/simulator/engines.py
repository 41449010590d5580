"""Engines the simulator drives: in-process decoding or the HTTP service.

Contract per sentence: initial() -> first hypothesis; constrained(prefix)
-> hypothesis starting with the prefix byte-for-byte; validate() ends the
sentence, optionally triggering online adaptation.
"""

from typing import Protocol

from ..adaptation import AdaptationConfig, ValidatedSample, adapt, load_checkpoint
from ..decoding import Feedback, beam_search, prefix_constrained_search
from ..textdata import tokenize


class Engine(Protocol):
    def initial(self, source: str) -> str: ...

    def constrained(self, source: str, prefix: str) -> str: ...

    def validate(self, source: str, target: str, learn: bool) -> None: ...


class LocalEngine:
    """Drives the decoding/adaptation modules directly, in process."""

    def __init__(self, model, src_vocab, tgt_vocab, task: str,
                 adapt_config: AdaptationConfig = AdaptationConfig(),
                 beam_width: int = 6):
        self.model = model
        self.src_vocab = src_vocab
        self.tgt_vocab = tgt_vocab
        self.task = task
        self.adapt_config = adapt_config
        self.beam_width = beam_width

    @classmethod
    def from_checkpoint(cls, path, task: str, **kw) -> "LocalEngine":
        model, sv, tv = load_checkpoint(path)
        return cls(model, sv, tv, task, **kw)

    def _src_ids(self, source):
        return tokenize(source, self.src_vocab)

    def initial(self, source):
        return beam_search(
            self.model, self._src_ids(source), beam_width=self.beam_width,
            vocab=self.tgt_vocab,
        )[0].text

    def constrained(self, source, prefix):
        return prefix_constrained_search(
            self.model, self._src_ids(source), Feedback(prefix),
            beam_width=self.beam_width, vocab=self.tgt_vocab,
        ).text

    def validate(self, source, target, learn):
        if learn:
            adapt(
                self.model, self.src_vocab, self.tgt_vocab,
                ValidatedSample(source, target, self.task), self.adapt_config,
            )


class HttpEngine:
    """Routes every round through the wire protocol of a running server."""

    def __init__(self, base_url: str, task: str, timeout: float = 60.0):
        import httpx

        self._client = httpx.Client(base_url=base_url, timeout=timeout)
        self.task = task
        self._session_id = None

    def _unwrap(self, response):
        data = response.json()
        if "error" in data:
            err = data["error"]
            raise RuntimeError(f"server error {err['code']}: {err['message']}")
        return data

    def initial(self, source):
        data = self._unwrap(
            self._client.post(
                "/api/translate", json={"task": self.task, "source": source}
            )
        )
        self._session_id = data["session_id"]
        return data["hypothesis"]

    def constrained(self, source, prefix):
        data = self._unwrap(
            self._client.post(
                "/api/correct",
                json={"session_id": self._session_id, "prefix": prefix, "source": source},
            )
        )
        return data["hypothesis"]

    def validate(self, source, target, learn):
        self._unwrap(
            self._client.post(
                "/api/validate",
                json={
                    "session_id": self._session_id,
                    "target": target,
                    "learn": bool(learn),
                    "source": source,
                },
            )
        )
        self._session_id = None
