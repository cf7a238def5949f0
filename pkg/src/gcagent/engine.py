"""LLM engine: prompt assembly plus pluggable completion backends.

Two backends ship here. MockEngine is a pure function of (request, seed) and
is what tests and the default config use. RemoteEngine speaks the common
chat-completion JSON dialect over HTTP so any compatible server can stand in.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import httpx

from .config import Config
from .errors import EngineTimeout, MissingCredential, RemoteError, TransportError
from .manager import DialogueContext

DEFAULT_TEMPERATURE = 0.7
DEFAULT_MAX_TOKENS = 256


@dataclass(frozen=True)
class EngineConfig:
    endpoint: str
    model_name: str
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    timeout_ms: int = 30000
    credential_ref: str = "GCAGENT_API_KEY"

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of [0, 2]: {self.temperature}")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.timeout_ms < 1:
            raise ValueError("timeout_ms must be >= 1")


@dataclass(frozen=True)
class Sampling:
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS


@dataclass(frozen=True)
class EngineRequest:
    system_text: str
    turns: tuple[tuple[str, str], ...]  # (speaker_label, text), final turn = trigger
    sampling: Sampling
    request_id: str

    def canonical_bytes(self) -> bytes:
        """Stable serialization of the content (request_id excluded)."""
        payload = {
            "system_text": self.system_text,
            "turns": [[label, text] for label, text in self.turns],
            "sampling": [self.sampling.temperature, self.sampling.max_tokens],
        }
        return json.dumps(
            payload, sort_keys=True, ensure_ascii=False, separators=(",", ":")
        ).encode("utf-8")


class FinishReason(str, Enum):
    STOP = "Stop"
    LENGTH = "Length"
    ERROR = "Error"


@dataclass(frozen=True)
class EngineResponse:
    text: str
    finish_reason: FinishReason
    token_usage: tuple[int, int] = (0, 0)  # (prompt, completion); zeros when unreported


SYSTEM_TEMPLATE = (
    "You are {name}. {persona}\n\n"
    "You are one participant in a group chat with several people and agents. "
    "Each earlier message is shown as \"speaker: text\". "
    "Write the next message from {name}: a single conversational reply, "
    "without your own name as a prefix."
)


def build_prompt(context: DialogueContext, sampling: Sampling | None = None) -> EngineRequest:
    """Deterministically turn a dialogue context into an engine request.

    One turn per window message plus the trigger as the final turn, speaker
    labels from the context's display-name map (raw refs when unmapped).
    """
    sampling = sampling or Sampling()
    names = context.speaker_names

    def label(ref: str) -> str:
        return names.get(ref, ref)

    turns = [(label(m.sender), m.body) for m in context.history_window]
    turns.append((label(context.latest_message.sender), context.latest_message.body))
    system_text = SYSTEM_TEMPLATE.format(
        name=context.agent_name, persona=context.role_configuration
    )
    request = EngineRequest(
        system_text=system_text,
        turns=tuple(turns),
        sampling=sampling,
        request_id="",
    )
    digest = hashlib.sha256(request.canonical_bytes()).hexdigest()
    return EngineRequest(
        system_text=request.system_text,
        turns=request.turns,
        sampling=request.sampling,
        request_id=digest,
    )


class Engine(Protocol):
    def complete(self, request: EngineRequest) -> EngineResponse: ...


def mock_complete(request: EngineRequest, seed: int) -> EngineResponse:
    """Deterministic stand-in completion.

    The text carries the seed, a digest of the request, and the final turn's
    text, so a test can tell which request and which seed produced it.
    """
    digest = hashlib.sha256(
        request.canonical_bytes() + f"|seed={seed}".encode("utf-8")
    ).hexdigest()
    final_text = request.turns[-1][1] if request.turns else ""
    text = f"[mock seed={seed} id={digest[:12]}] {final_text}".strip()
    prompt_chars = len(request.system_text) + sum(len(t) for _, t in request.turns)
    return EngineResponse(
        text=text,
        finish_reason=FinishReason.STOP,
        token_usage=(prompt_chars // 4, len(text) // 4),
    )


class MockEngine:
    def __init__(self, seed: int = 0):
        self.seed = seed

    def complete(self, request: EngineRequest) -> EngineResponse:
        return mock_complete(request, self.seed)


class RemoteEngine:
    """Client for a chat-completion-compatible HTTP service.

    Transcript turns go over the wire as user-role messages with the
    speaker name folded into the content ("name: text"), since the wire
    schema only distinguishes system/user/assistant.
    """

    def __init__(self, config: EngineConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(
            timeout=config.timeout_ms / 1000.0, transport=transport
        )

    def complete(self, request: EngineRequest) -> EngineResponse:
        key = os.environ.get(self.config.credential_ref, "")
        if not key:
            raise MissingCredential(self.config.credential_ref)
        messages = [{"role": "system", "content": request.system_text}]
        for label, text in request.turns:
            messages.append({"role": "user", "content": f"{label}: {text}"})
        payload = {
            "model": self.config.model_name,
            "messages": messages,
            "temperature": request.sampling.temperature,
            "max_tokens": request.sampling.max_tokens,
        }
        try:
            response = self._client.post(
                self.config.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {key}"},
            )
        except httpx.TimeoutException as exc:
            raise EngineTimeout(str(exc)) from exc
        except httpx.TransportError as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code >= 400:
            raise RemoteError(response.status_code, response.text[:500])
        try:
            data = response.json()
            choice = data["choices"][0]
            text = choice["message"]["content"] or ""
            raw_reason = choice.get("finish_reason", "stop")
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise RemoteError(response.status_code, f"malformed completion payload: {exc}") from exc
        if raw_reason == "stop":
            # An empty completion cannot count as a clean stop.
            finish = FinishReason.STOP if text else FinishReason.ERROR
        elif raw_reason == "length":
            finish = FinishReason.LENGTH
        else:
            finish = FinishReason.ERROR
        usage = data.get("usage") or {}
        return EngineResponse(
            text=text,
            finish_reason=finish,
            token_usage=(
                int(usage.get("prompt_tokens", 0)),
                int(usage.get("completion_tokens", 0)),
            ),
        )

    def close(self) -> None:
        self._client.close()


def make_engine(config: Config, transport: httpx.BaseTransport | None = None) -> Engine:
    """Build the backend selected by `engine.backend` (mock or remote)."""
    backend = config.get("engine.backend")
    if backend == "mock":
        return MockEngine(seed=config.get_int("engine.mock_seed"))
    if backend == "remote":
        return RemoteEngine(
            EngineConfig(
                endpoint=config.get("engine.endpoint"),
                model_name=config.get("engine.model"),
                temperature=config.get_float("engine.temperature"),
                max_tokens=config.get_int("engine.max_tokens"),
                timeout_ms=config.get_int("engine.timeout_ms"),
                credential_ref=config.get("engine.credential_ref"),
            ),
            transport=transport,
        )
    raise ValueError(f"unknown engine backend: {backend!r}")


def sampling_from_config(config: Config) -> Sampling:
    return Sampling(
        temperature=config.get_float("engine.temperature"),
        max_tokens=config.get_int("engine.max_tokens"),
    )
