"""Group dialogue state: sequencing, mention resolution, invocation decisions.

Everything here is synchronous and side-effect free except ingest_message,
which mutates the session it is given. Durability and event emission live in
the service layer; this module only knows how to apply and replay them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    CorruptLog,
    InvalidBody,
    UnknownAgent,
    UnknownMessage,
    UnknownReplyTarget,
    UnknownSender,
)
from .events import EventRecord, EventType

MAX_BODY_LEN = 4000


@dataclass(frozen=True)
class ChatMessage:
    msg_id: str
    group_id: str
    seq: int
    sender: str
    body: str
    mentions: tuple[str, ...]
    reply_to: str | None
    ts: int

    def to_dict(self) -> dict:
        return {
            "msg_id": self.msg_id,
            "group_id": self.group_id,
            "seq": self.seq,
            "sender": self.sender,
            "body": self.body,
            "mentions": list(self.mentions),
            "reply_to": self.reply_to,
            "ts": self.ts,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChatMessage":
        try:
            return cls(
                msg_id=data["msg_id"],
                group_id=data["group_id"],
                seq=int(data["seq"]),
                sender=data["sender"],
                body=data["body"],
                mentions=tuple(data["mentions"]),
                reply_to=data.get("reply_to"),
                ts=int(data["ts"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptLog(f"malformed message payload: {exc}") from exc


@dataclass
class GroupSession:
    group_id: str
    human_roster: set[str] = field(default_factory=set)
    agent_roster: set[str] = field(default_factory=set)
    next_seq: int = 1
    history: list[ChatMessage] = field(default_factory=list)

    def find_message(self, msg_id: str) -> ChatMessage | None:
        for message in self.history:
            if message.msg_id == msg_id:
                return message
        return None


@dataclass(frozen=True)
class DialogueContext:
    """The unit handed to the engine: persona, recent history, trigger.

    speaker_names maps participant refs to display names so a prompt can
    label turns with something readable instead of opaque ids.
    """

    role_configuration: str
    history_window: tuple[ChatMessage, ...]
    latest_message: ChatMessage
    agent_id: str
    agent_name: str
    speaker_names: dict[str, str] = field(default_factory=dict)


def parse_mentions(body: str, roster_names: list[tuple[str, str]]) -> list[str]:
    """Resolve "@" tags against a (name, ref) roster.

    At each "@" the longest roster name that follows, compared
    case-insensitively with no gap after the "@", wins. Unmatched tags are
    skipped. Output keeps order of first appearance, deduplicated.
    """
    # Longest first so the first prefix hit is the longest hit.
    ordered = sorted(roster_names, key=lambda pair: (-len(pair[0]), pair[0].lower()))
    found: list[str] = []
    seen: set[str] = set()
    for i, ch in enumerate(body):
        if ch != "@":
            continue
        tail = body[i + 1:]
        for name, ref in ordered:
            if len(name) <= len(tail) and tail[: len(name)].lower() == name.lower():
                if ref not in seen:
                    seen.add(ref)
                    found.append(ref)
                break
    return found


def ingest_message(
    session: GroupSession,
    sender: str,
    body: str,
    roster_names: list[tuple[str, str]],
    msg_id: str,
    ts: int,
    reply_to: str | None = None,
) -> ChatMessage:
    """Validate, sequence, and append one message to the session."""
    if sender not in session.human_roster and sender not in session.agent_roster:
        raise UnknownSender(sender)
    if not body.strip():
        raise InvalidBody("body is empty")
    if len(body) > MAX_BODY_LEN:
        raise InvalidBody(f"body exceeds {MAX_BODY_LEN} characters")
    if reply_to is not None and session.find_message(reply_to) is None:
        raise UnknownReplyTarget(reply_to)
    message = ChatMessage(
        msg_id=msg_id,
        group_id=session.group_id,
        seq=session.next_seq,
        sender=sender,
        body=body,
        mentions=tuple(parse_mentions(body, roster_names)),
        reply_to=reply_to,
        ts=ts,
    )
    session.history.append(message)
    session.next_seq += 1
    return message


def decide_invocations(
    message: ChatMessage,
    session: GroupSession,
    reply_triggers: bool = True,
) -> list[str]:
    """Which agents must answer this message, in answer order.

    Mentioned agents first, in order of appearance; then the author of the
    replied-to message when that author is an agent not already listed.
    Agent-authored messages never trigger anyone, which keeps two agents
    from invoking each other forever.
    """
    if message.sender in session.agent_roster:
        return []
    invoked = [ref for ref in message.mentions if ref in session.agent_roster]
    if reply_triggers and message.reply_to is not None:
        target = session.find_message(message.reply_to)
        if target is not None and target.sender in session.agent_roster and target.sender not in invoked:
            invoked.append(target.sender)
    return invoked


def assemble_context(
    session: GroupSession,
    agent_id: str,
    triggering_message: ChatMessage,
    persona: str,
    agent_name: str,
    window: int = 30,
    speaker_names: dict[str, str] | None = None,
) -> DialogueContext:
    """Build the engine input: persona plus up to `window` prior messages."""
    if agent_id not in session.agent_roster:
        raise UnknownAgent(agent_id)
    position = None
    for i, message in enumerate(session.history):
        if message.msg_id == triggering_message.msg_id:
            position = i
            break
    if position is None:
        raise UnknownMessage(triggering_message.msg_id)
    start = max(0, position - window) if window > 0 else position
    history_window = tuple(session.history[start:position])
    return DialogueContext(
        role_configuration=persona,
        history_window=history_window,
        latest_message=session.history[position],
        agent_id=agent_id,
        agent_name=agent_name,
        speaker_names=dict(speaker_names or {}),
    )


def replay(events: list[EventRecord]) -> GroupSession:
    """Rebuild a session from its event log.

    The log must be a contiguous prefix of one group's log: event seqs
    1..n and message seqs 1..m, both gap-free.
    """
    if not events:
        raise CorruptLog("empty log: no GroupCreated event")
    session = GroupSession(group_id=events[0].group_id)
    expected_event_seq = 1
    for record in events:
        if record.group_id != session.group_id:
            raise CorruptLog(
                f"mixed groups in one log: {session.group_id} vs {record.group_id}"
            )
        if record.seq != expected_event_seq:
            raise CorruptLog(
                f"event seq gap: expected {expected_event_seq}, got {record.seq}"
            )
        expected_event_seq += 1
        if record.event_type is EventType.GROUP_CREATED:
            pass
        elif record.event_type is EventType.PARTICIPANT_JOINED:
            session.human_roster.add(record.payload["user_id"])
        elif record.event_type is EventType.AGENT_ATTACHED:
            session.agent_roster.add(record.payload["agent_id"])
        elif record.event_type in (EventType.MESSAGE_POSTED, EventType.AGENT_REPLIED):
            message = ChatMessage.from_dict(record.payload["message"])
            if message.seq != session.next_seq:
                raise CorruptLog(
                    f"message seq gap: expected {session.next_seq}, got {message.seq}"
                )
            session.history.append(message)
            session.next_seq += 1
        elif record.event_type in (EventType.PLUGIN_INVOKED, EventType.MESSAGE_VIEWED):
            pass  # no session-state effect; analytics-only
        else:
            raise CorruptLog(f"unknown event type: {record.event_type}")
    return session
