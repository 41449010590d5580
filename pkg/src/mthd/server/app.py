"""JSON/HTTP wiring around ServerState.

All bodies are UTF-8 JSON. Errors use
``{"error": {"code": ..., "message": ...}}`` with a matching status class.
Handlers are plain (sync) functions so the framework runs them in its
threadpool; blocking on the task RW locks implements the drain semantics.
"""

import json

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import Response

from .config import ServerConfig
from .state import ApiError, ServerState


class JsonBody(Response):
    """Compact, key-order-preserving JSON (stable bytes for golden tests)."""

    media_type = "application/json"

    def render(self, content) -> bytes:
        return json.dumps(
            content, ensure_ascii=False, separators=(",", ":"), allow_nan=False
        ).encode("utf-8")


def _error(status: int, code: str, message: str) -> JsonBody:
    return JsonBody({"error": {"code": code, "message": message}}, status_code=status)


async def _body(request: Request) -> dict:
    try:
        data = json.loads(await request.body() or b"{}")
    except json.JSONDecodeError as exc:
        raise ApiError(400, "bad_request", f"malformed JSON body: {exc}") from exc
    if not isinstance(data, dict):
        raise ApiError(400, "bad_request", "JSON body must be an object")
    return data


def create_app(config: ServerConfig, state: ServerState | None = None) -> FastAPI:
    state = state or ServerState(config)
    app = FastAPI(title="mthd", docs_url=None, redoc_url=None)
    app.state.server_state = state

    if config.cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_origins,
            allow_methods=["GET", "POST"],
            allow_headers=["content-type"],
        )

    @app.exception_handler(ApiError)
    async def on_api_error(request, exc: ApiError):
        return _error(exc.status, exc.code, exc.message)

    @app.exception_handler(Exception)
    async def on_crash(request, exc):
        return _error(500, "internal_error", f"{type(exc).__name__}: {exc}")

    @app.get("/api/health")
    async def health():
        return JsonBody(await run_in_threadpool(state.health))

    @app.get("/api/sentences")
    async def sentences(task: str = ""):
        result = await run_in_threadpool(state.list_sentences, task)
        return JsonBody({"sentences": result})

    @app.post("/api/translate")
    async def translate(request: Request):
        data = await _body(request)
        result = await run_in_threadpool(
            state.translate, data.get("task", ""), data.get("source", "")
        )
        return JsonBody(result)

    @app.post("/api/correct")
    async def correct(request: Request):
        data = await _body(request)
        result = await run_in_threadpool(
            state.correct,
            data.get("session_id", ""),
            data.get("prefix", ""),
            data.get("source"),
        )
        return JsonBody(result)

    @app.post("/api/validate")
    async def validate(request: Request):
        data = await _body(request)
        result = await run_in_threadpool(
            state.validate,
            data.get("session_id", ""),
            data.get("target", ""),
            bool(data.get("learn", False)),
            data.get("source"),
        )
        return JsonBody(result)

    if config.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
