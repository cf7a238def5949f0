"""HTTP API over ChatService: REST endpoints plus NDJSON event streaming.

Wire frames on the stream are byte-identical to log lines. Blank lines are
keepalives and carry nothing; a frame with event_type "StreamClosed" is the
server saying goodbye on purpose, so clients can tell a close from a crash.
"""

from __future__ import annotations

import json
import queue

import uvicorn
from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from .config import Config
from .errors import (
    AdapterFailure,
    BindFailure,
    EngineError,
    ExhaustedRetries,
    GcagentError,
    InvalidBody,
    InvalidName,
    InvalidPersona,
    MalformedBlob,
    UnknownAgent,
    UnknownGroup,
    UnknownMessage,
    UnknownReplyTarget,
    UnknownSender,
    UnknownVoiceStyle,
    UnsupportedPlugin,
)
from .plugins import PluginKind, PluginRequest
from .service import ChatService

KEEPALIVE_MS_KEY = "server.keepalive_ms"


class CreateAgentBody(BaseModel):
    name: str
    persona: str
    category: str
    creator_id: str = "anonymous"
    greeting: str | None = None
    voice_style_id: str | None = None


class JoinBody(BaseModel):
    user_id: str = Field(min_length=1)


class PostMessageBody(BaseModel):
    sender: str = Field(min_length=1)
    body: str
    reply_to: str | None = None


class ViewBody(BaseModel):
    user_id: str = Field(min_length=1)
    msg_id: str = Field(min_length=1)


class PluginBody(BaseModel):
    text: str | None = None
    audio_ref: str | None = None
    voice_style_id: str | None = None
    group_id: str | None = None


_STATUS_BY_ERROR: list[tuple[type, int]] = [
    (UnknownVoiceStyle, 400),
    (UnknownSender, 400),
    (UnknownReplyTarget, 404),
    (UnknownGroup, 404),
    (UnknownAgent, 404),
    (UnknownMessage, 404),
    (UnsupportedPlugin, 404),
    (InvalidPersona, 400),
    (InvalidBody, 400),
    (MalformedBlob, 400),
    (AdapterFailure, 502),
    (ExhaustedRetries, 502),
    (EngineError, 502),
]


def _status_for(exc: GcagentError) -> int:
    if isinstance(exc, InvalidName):
        return 409 if "duplicate" in str(exc) else 400
    for error_type, status in _STATUS_BY_ERROR:
        if isinstance(exc, error_type):
            return status
    return 500


def create_app(service: ChatService) -> FastAPI:
    app = FastAPI(title="gcagent", docs_url=None, redoc_url=None)
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    keepalive_s = service.config.get_int(KEEPALIVE_MS_KEY) / 1000.0

    @app.exception_handler(GcagentError)
    def _domain_error(_request: Request, exc: GcagentError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(ValueError)
    def _value_error(_request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400, content={"error": "ValueError", "detail": str(exc)}
        )

    # -- agents -----------------------------------------------------------

    @app.post("/agents", status_code=201)
    def create_agent(body: CreateAgentBody):
        profile = service.registry.create_agent(
            name=body.name,
            persona=body.persona,
            category=body.category,
            creator_id=body.creator_id,
            greeting=body.greeting,
            voice_style_id=body.voice_style_id,
        )
        return profile.to_dict()

    @app.get("/agents")
    def list_agents(category: str | None = None):
        profiles = service.registry.list_catalog(category)
        return {"agents": [p.to_dict() for p in profiles]}

    # -- groups -----------------------------------------------------------

    @app.post("/groups", status_code=201)
    def create_group():
        return {"group_id": service.create_group()}

    @app.post("/groups/{gid}/join")
    def join_group(gid: str, body: JoinBody):
        members = service.join_group(gid, body.user_id)
        return {"members": sorted(members)}

    @app.post("/groups/{gid}/agents/{aid}")
    def attach_agent(gid: str, aid: str):
        roster = service.attach_agent(gid, aid)
        return {"agents": sorted(roster)}

    @app.post("/groups/{gid}/messages", status_code=201)
    def post_message(gid: str, body: PostMessageBody):
        message, replies = service.post_message(
            gid, sender=body.sender, body=body.body, reply_to=body.reply_to
        )
        return {
            "message": message.to_dict(),
            "replies": [r.to_dict() for r in replies],
        }

    @app.get("/groups/{gid}/messages")
    def get_messages(gid: str, from_seq: int = Query(1, ge=1)):
        messages = service.get_messages(gid, from_seq)
        return {"messages": [m.to_dict() for m in messages]}

    @app.post("/groups/{gid}/views", status_code=201)
    def record_view(gid: str, body: ViewBody):
        service.record_view(gid, body.user_id, body.msg_id)
        return {"ok": True}

    # -- event stream -------------------------------------------------------

    @app.get("/groups/{gid}/events")
    def stream_events(gid: str, from_seq: int = Query(1, ge=1)):
        sub = service.subscribe(gid, from_seq)  # raises UnknownGroup before streaming

        def frames():
            try:
                while True:
                    try:
                        record = sub.get(timeout=keepalive_s)
                    except queue.Empty:
                        yield "\n"  # keepalive; consumers skip blank lines
                        continue
                    if record is None:
                        yield json.dumps(
                            {"event_type": "StreamClosed", "group_id": gid}
                        ) + "\n"
                        return
                    yield record.to_line() + "\n"
            finally:
                service.unsubscribe(sub)

        return StreamingResponse(frames(), media_type="application/x-ndjson")

    # -- plugins -----------------------------------------------------------

    @app.post("/plugins/{kind}")
    def call_plugin(kind: str, body: PluginBody):
        try:
            plugin_kind = PluginKind(kind)
        except ValueError as exc:
            raise UnsupportedPlugin(kind) from exc
        request = PluginRequest(
            kind=plugin_kind,
            text=body.text,
            audio_ref=body.audio_ref,
            voice_style_id=body.voice_style_id,
        )
        result = service.run_plugin(plugin_kind, request, group_id=body.group_id)
        return result.to_dict()

    return app


def serve(config: Config) -> None:
    """Run the API server until interrupted."""
    service = ChatService(config)
    app = create_app(service)
    host = config.get("server.host")
    port = config.get_int("server.port")
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        raise BindFailure(f"{host}:{port}: {exc}") from exc
    finally:
        service.close()
