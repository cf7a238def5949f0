"""Speech plugin contracts: ASR, TTS, and sung TTS adapters.

Real synthesis and recognition models stay behind the adapter boundary. The
stub adapters are deterministic inverses of each other: a stub blob is a
tagged, base64-encoded copy of the input text, so recognition can read back
exactly what synthesis was given.
"""

from __future__ import annotations

import base64
import binascii
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import httpx

from .config import Config
from .errors import AdapterFailure, GcagentError, MalformedBlob, UnsupportedPlugin

BLOB_PREFIX = "stub-audio:v1"
FOREIGN_TRANSCRIPT = "[unrecognized audio]"

# Deterministic per-character duration estimates, speech vs singing.
_MS_PER_CHAR = {"tts": 60, "ttsing": 150}


class PluginKind(str, Enum):
    ASR = "asr"
    TTS = "tts"
    TTSING = "ttsing"


@dataclass(frozen=True)
class PluginRequest:
    kind: PluginKind
    text: str | None = None
    audio_ref: str | None = None
    voice_style_id: str | None = None

    def __post_init__(self):
        if self.kind is PluginKind.ASR:
            if self.audio_ref is None or self.text is not None:
                raise ValueError("ASR request carries audio_ref and no text")
        else:
            if self.text is None or self.audio_ref is not None:
                raise ValueError(f"{self.kind.value} request carries text and no audio_ref")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "text": self.text,
            "audio_ref": self.audio_ref,
            "voice_style_id": self.voice_style_id,
        }


@dataclass(frozen=True)
class PluginResult:
    kind: PluginKind
    text: str | None = None
    audio_ref: str | None = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "text": self.text,
            "audio_ref": self.audio_ref,
            "metadata": self.metadata,
        }


Adapter = Callable[[PluginRequest], PluginResult]


def _encode_blob(kind: PluginKind, style: str, text: str) -> str:
    encoded = base64.b64encode(text.encode("utf-8")).decode("ascii")
    return f"{BLOB_PREFIX}:{kind.value}:{style}:{encoded}"


def _synthesize(request: PluginRequest, kind: PluginKind) -> PluginResult:
    style = request.voice_style_id or "default"
    text = request.text or ""
    return PluginResult(
        kind=kind,
        audio_ref=_encode_blob(kind, style, text),
        metadata={
            "style": style,
            "text": text,
            "duration_ms": len(text) * _MS_PER_CHAR[kind.value],
        },
    )


def stub_tts(request: PluginRequest) -> PluginResult:
    return _synthesize(request, PluginKind.TTS)


def stub_ttsing(request: PluginRequest) -> PluginResult:
    return _synthesize(request, PluginKind.TTSING)


def stub_asr(request: PluginRequest) -> PluginResult:
    """Read the text back out of a stub blob.

    Blobs without the stub tag are someone else's audio: those transcribe to
    a fixed marker. Blobs with the tag but an unreadable body are corrupt.
    """
    blob = request.audio_ref or ""
    if not blob.startswith(BLOB_PREFIX + ":"):
        return PluginResult(
            kind=PluginKind.ASR, text=FOREIGN_TRANSCRIPT, metadata={"foreign": True}
        )
    parts = blob.split(":", 4)
    if len(parts) != 5:
        raise MalformedBlob("stub blob missing fields")
    _, _, source_kind, style, encoded = parts
    try:
        text = base64.b64decode(encoded.encode("ascii"), validate=True).decode("utf-8")
    except (binascii.Error, UnicodeDecodeError, ValueError) as exc:
        raise MalformedBlob(f"undecodable stub blob body: {exc}") from exc
    return PluginResult(
        kind=PluginKind.ASR,
        text=text,
        metadata={"style": style, "source_kind": source_kind},
    )


class RemoteAdapter:
    """Forward the request JSON to an HTTP service returning PluginResult JSON."""

    def __init__(self, kind: PluginKind, endpoint: str, transport: httpx.BaseTransport | None = None):
        self.kind = kind
        self.endpoint = endpoint
        self._client = httpx.Client(timeout=30.0, transport=transport)

    def __call__(self, request: PluginRequest) -> PluginResult:
        try:
            response = self._client.post(self.endpoint, json=request.to_dict())
        except httpx.HTTPError as exc:
            raise AdapterFailure(str(exc)) from exc
        if response.status_code >= 400:
            raise AdapterFailure(f"status {response.status_code}: {response.text[:200]}")
        try:
            data = response.json()
            return PluginResult(
                kind=PluginKind(data["kind"]),
                text=data.get("text"),
                audio_ref=data.get("audio_ref"),
                metadata=data.get("metadata", {}),
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise AdapterFailure(f"malformed adapter response: {exc}") from exc


_STUBS: dict[PluginKind, Adapter] = {
    PluginKind.ASR: stub_asr,
    PluginKind.TTS: stub_tts,
    PluginKind.TTSING: stub_ttsing,
}


def build_adapters(config: Config, transport: httpx.BaseTransport | None = None) -> dict[PluginKind, Adapter]:
    """Adapter per kind as selected by `plugins.<kind>.adapter` (stub or remote)."""
    registry: dict[PluginKind, Adapter] = {}
    for kind in PluginKind:
        choice = config.get(f"plugins.{kind.value}.adapter")
        if choice == "stub":
            registry[kind] = _STUBS[kind]
        elif choice == "remote":
            endpoint = config.get(f"plugins.{kind.value}.endpoint")
            if not endpoint:
                raise ValueError(f"plugins.{kind.value}.endpoint required for remote adapter")
            registry[kind] = RemoteAdapter(kind, endpoint, transport=transport)
        else:
            raise ValueError(f"unknown adapter {choice!r} for {kind.value}")
    return registry


def dispatch(request: PluginRequest, adapter_registry: dict[PluginKind, Adapter]) -> PluginResult:
    """Route to the registered adapter; wraps unexpected adapter crashes."""
    adapter = adapter_registry.get(request.kind)
    if adapter is None:
        raise UnsupportedPlugin(request.kind.value)
    try:
        return adapter(request)
    except GcagentError:
        raise
    except Exception as exc:  # adapter bug or remote misbehavior
        raise AdapterFailure(str(exc)) from exc
