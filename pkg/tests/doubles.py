"""Scripted engine and judge doubles shared across test modules."""

from __future__ import annotations

from gcagent.engine import EngineRequest, EngineResponse, FinishReason
from gcagent.manager import ChatMessage, DialogueContext


class ScriptedEngine:
    """Returns canned texts in order; the last one repeats. Counts calls."""

    def __init__(self, *texts: str):
        self.texts = list(texts)
        self.calls = 0

    def complete(self, request: EngineRequest) -> EngineResponse:
        text = self.texts[min(self.calls, len(self.texts) - 1)]
        self.calls += 1
        return EngineResponse(text=text, finish_reason=FinishReason.STOP)


class ScriptedJudge(ScriptedEngine):
    pass


class AlwaysFirstJudge:
    """Position-biased judge: whatever is shown first wins."""

    def __init__(self):
        self.calls = 0

    def complete(self, request: EngineRequest) -> EngineResponse:
        self.calls += 1
        return EngineResponse(
            text="The first reply reads better. Verdict: first",
            finish_reason=FinishReason.STOP,
        )


class PreferContentJudge:
    """Content-based judge: prefers the candidate containing a marker string."""

    def __init__(self, preferred: str):
        self.preferred = preferred
        self.calls = 0

    def complete(self, request: EngineRequest) -> EngineResponse:
        self.calls += 1
        prompt = request.turns[-1][1]
        first_block = prompt.find("Reply one:")
        second_block = prompt.find("Reply two:")
        hit = prompt.find(self.preferred)
        if hit < 0:
            word = "tie"
        elif first_block < hit < second_block:
            word = "first"
        else:
            word = "second"
        return EngineResponse(
            text=f"Compared both. Verdict: {word}", finish_reason=FinishReason.STOP
        )


def mk_msg(
    seq: int,
    sender: str = "alice",
    body: str = "hello",
    group_id: str = "g1",
    mentions: tuple[str, ...] = (),
    reply_to: str | None = None,
) -> ChatMessage:
    return ChatMessage(
        msg_id=f"m{seq}",
        group_id=group_id,
        seq=seq,
        sender=sender,
        body=body,
        mentions=mentions,
        reply_to=reply_to,
        ts=1_700_000_000_000 + seq,
    )


def mk_context(
    latest_body: str = "hi there",
    persona: str = "A cheerful DJ who loves upbeat music.",
    agent_name: str = "DJ Bot",
    window: tuple[ChatMessage, ...] = (),
) -> DialogueContext:
    latest = mk_msg(len(window) + 1, sender="alice", body=latest_body)
    return DialogueContext(
        role_configuration=persona,
        history_window=window,
        latest_message=latest,
        agent_id="a1",
        agent_name=agent_name,
        speaker_names={"alice": "alice", "a1": agent_name},
    )
