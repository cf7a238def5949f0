"""Orchestration core tying registry, manager, engine, validator, and log together.

One instance owns all group state. Mutations for a group run under that
group's lock, so each group behaves as a single-owner state machine and at
most one engine completion is in flight per group. Subscribers are fanned
out under the same lock, which is what makes backlog-then-live delivery
gap-free and duplicate-free.
"""

from __future__ import annotations

import queue
import threading
import time
import uuid
from pathlib import Path

from .config import Config
from .engine import Engine, make_engine, sampling_from_config
from .errors import UnknownAgent, UnknownGroup, UnknownMessage
from .events import EventRecord, EventStore, EventType
from .manager import (
    ChatMessage,
    GroupSession,
    assemble_context,
    decide_invocations,
    ingest_message,
    replay,
)
from .plugins import Adapter, PluginKind, PluginRequest, PluginResult, build_adapters, dispatch
from .registry import AgentRegistry, DEFAULT_VOICE_STYLES
from .validator import (
    OnExhaust,
    RetryPolicy,
    ValidationRule,
    default_ruleset,
    generate_validated,
    load_ruleset,
)


def _now_ms() -> int:
    return time.time_ns() // 1_000_000


class Subscription:
    """One client's ordered view of a group's event stream.

    Events arrive on an internal queue; ``get`` returns None once closed.
    """

    def __init__(self, group_id: str):
        self.group_id = group_id
        self._queue: "queue.Queue[EventRecord | None]" = queue.Queue()
        self.closed = False

    def put(self, record: EventRecord) -> None:
        self._queue.put(record)

    def get(self, timeout: float | None = None) -> EventRecord | None:
        return self._queue.get(timeout=timeout)

    def close(self) -> None:
        if not self.closed:
            self.closed = True
            self._queue.put(None)


class ChatService:
    def __init__(
        self,
        config: Config | None = None,
        engine: Engine | None = None,
        registry: AgentRegistry | None = None,
        store: EventStore | None = None,
        adapters: dict[PluginKind, Adapter] | None = None,
    ):
        self.config = config or Config()
        data_dir = Path(self.config.get("server.data_dir"))
        self.store = store or EventStore(
            data_dir / "events", fsync=self.config.get_bool("server.fsync")
        )
        if registry is None:
            data_dir.mkdir(parents=True, exist_ok=True)
            registry = AgentRegistry(
                DEFAULT_VOICE_STYLES, persist_path=data_dir / "agents.jsonl"
            )
            seed_path = self.config.get("registry.seed_path")
            registry.load_seed_catalog(seed_path or None)
        self.registry = registry
        self.engine = engine if engine is not None else make_engine(self.config)
        self.adapters = adapters if adapters is not None else build_adapters(self.config)
        rules_path = self.config.get("validator.rules_path")
        self._fixed_rules: list[ValidationRule] | None = (
            load_ruleset(rules_path) if rules_path else None
        )
        self._policy = RetryPolicy(
            max_retries=self.config.get_int("validator.max_retries"),
            on_exhaust=OnExhaust.FALLBACK,
            fallback_text=self.config.get("validator.fallback_text"),
        )
        self._sampling = sampling_from_config(self.config)
        self._window = self.config.get_int("manager.context_window")
        self._reply_triggers = self.config.get_bool("manager.reply_triggers")

        self._groups: dict[str, GroupSession] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._subs: dict[str, list[Subscription]] = {}
        self._registry_lock = threading.Lock()
        for group_id in self.store.group_ids():
            self._groups[group_id] = replay(self.store.read_events(group_id))

    # -- locking ----------------------------------------------------------------

    def _lock_for(self, group_id: str) -> threading.RLock:
        with self._registry_lock:
            lock = self._locks.get(group_id)
            if lock is None:
                lock = threading.RLock()
                self._locks[group_id] = lock
            return lock

    def _session(self, group_id: str) -> GroupSession:
        session = self._groups.get(group_id)
        if session is None:
            raise UnknownGroup(group_id)
        return session

    def _emit(self, group_id: str, event_type: EventType, payload: dict) -> EventRecord:
        record = self.store.emit(group_id, event_type, payload)
        for sub in self._subs.get(group_id, ()):  # caller holds the group lock
            sub.put(record)
        return record

    # -- group lifecycle ----------------------------------------------------------

    def create_group(self) -> str:
        group_id = "g" + uuid.uuid4().hex[:16]
        with self._registry_lock:
            self._groups[group_id] = GroupSession(group_id=group_id)
            self._locks[group_id] = threading.RLock()
        with self._lock_for(group_id):
            self._emit(group_id, EventType.GROUP_CREATED, {})
        return group_id

    def join_group(self, group_id: str, user_id: str) -> set[str]:
        with self._lock_for(group_id):
            session = self._session(group_id)
            if user_id not in session.human_roster:
                session.human_roster.add(user_id)
                self._emit(group_id, EventType.PARTICIPANT_JOINED, {"user_id": user_id})
            return set(session.human_roster)

    def attach_agent(self, group_id: str, agent_id: str) -> set[str]:
        profile = self.registry.get(agent_id)
        if profile is None:
            raise UnknownAgent(agent_id)
        with self._lock_for(group_id):
            session = self._session(group_id)
            if agent_id not in session.agent_roster:
                session.agent_roster.add(agent_id)
                self._emit(
                    group_id,
                    EventType.AGENT_ATTACHED,
                    {
                        "agent_id": agent_id,
                        "name": profile.name,
                        "category": profile.category.value,
                    },
                )
            return set(session.agent_roster)

    # -- messaging ----------------------------------------------------------------

    def _roster_names(self, session: GroupSession) -> list[tuple[str, str]]:
        names: list[tuple[str, str]] = []
        for agent_id in session.agent_roster:
            profile = self.registry.get(agent_id)
            if profile is not None:
                names.append((profile.name, agent_id))
        for user_id in session.human_roster:
            names.append((user_id, user_id))
        return names

    def _speaker_names(self, session: GroupSession) -> dict[str, str]:
        names = {user_id: user_id for user_id in session.human_roster}
        for agent_id in session.agent_roster:
            profile = self.registry.get(agent_id)
            names[agent_id] = profile.name if profile else agent_id
        return names

    def _ruleset(self, session: GroupSession) -> list[ValidationRule]:
        if self._fixed_rules is not None:
            return self._fixed_rules
        display = [name for name, _ in self._roster_names(session)]
        return default_ruleset(display)

    def post_message(
        self,
        group_id: str,
        sender: str,
        body: str,
        reply_to: str | None = None,
    ) -> tuple[ChatMessage, list[ChatMessage]]:
        """Ingest one message and run the invocation pipeline to completion.

        Returns the posted message plus any agent replies, already persisted
        and streamed in order. Holding the group lock across the engine calls
        is what keeps one completion in flight per group.
        """
        with self._lock_for(group_id):
            session = self._session(group_id)
            roster_names = self._roster_names(session)
            message = ingest_message(
                session,
                sender=sender,
                body=body,
                roster_names=roster_names,
                msg_id="m" + uuid.uuid4().hex[:16],
                ts=_now_ms(),
                reply_to=reply_to,
            )
            self._emit(group_id, EventType.MESSAGE_POSTED, {"message": message.to_dict()})
            replies: list[ChatMessage] = []
            invoked = decide_invocations(message, session, self._reply_triggers)
            ruleset = self._ruleset(session)
            speakers = self._speaker_names(session)
            for agent_id in invoked:
                profile = self.registry.get(agent_id)
                if profile is None:
                    continue  # attached then lost from the registry; nothing to say
                context = assemble_context(
                    session,
                    agent_id,
                    message,
                    persona=profile.persona,
                    agent_name=profile.name,
                    window=self._window,
                    speaker_names=speakers,
                )
                text = generate_validated(
                    context, self.engine, ruleset, self._policy, self._sampling
                )
                reply = ingest_message(
                    session,
                    sender=agent_id,
                    body=text,
                    roster_names=roster_names,
                    msg_id="m" + uuid.uuid4().hex[:16],
                    ts=_now_ms(),
                    reply_to=message.msg_id,
                )
                self._emit(
                    group_id,
                    EventType.AGENT_REPLIED,
                    {
                        "message": reply.to_dict(),
                        "trigger_msg_id": message.msg_id,
                        "agent_id": agent_id,
                    },
                )
                replies.append(reply)
            return message, replies

    def get_messages(self, group_id: str, from_seq: int = 1) -> list[ChatMessage]:
        with self._lock_for(group_id):
            session = self._session(group_id)
            return [m for m in session.history if m.seq >= from_seq]

    def record_view(self, group_id: str, user_id: str, msg_id: str) -> None:
        with self._lock_for(group_id):
            session = self._session(group_id)
            if session.find_message(msg_id) is None:
                raise UnknownMessage(msg_id)
            self._emit(
                group_id, EventType.MESSAGE_VIEWED, {"user_id": user_id, "msg_id": msg_id}
            )

    # -- plugins --------------------------------------------------------------------

    def run_plugin(
        self, kind: PluginKind, request: PluginRequest, group_id: str | None = None
    ) -> PluginResult:
        """Dispatch a plugin call, recording it on the group log when one is given."""
        ok = False
        try:
            result = dispatch(request, self.adapters)
            ok = True
            return result
        finally:
            if group_id is not None and group_id in self._groups:
                with self._lock_for(group_id):
                    self._emit(
                        group_id,
                        EventType.PLUGIN_INVOKED,
                        {"kind": kind.value, "request": request.to_dict(), "ok": ok},
                    )

    # -- streaming ---------------------------------------------------------------------

    def subscribe(self, group_id: str, from_seq: int = 1) -> Subscription:
        """Backlog from from_seq, then every future event, exactly once in order."""
        with self._lock_for(group_id):
            if group_id not in self._groups:
                raise UnknownGroup(group_id)
            sub = Subscription(group_id)
            for record in self.store.read_events(group_id, from_seq):
                sub.put(record)
            self._subs.setdefault(group_id, []).append(sub)
            return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock_for(sub.group_id):
            subs = self._subs.get(sub.group_id, [])
            if sub in subs:
                subs.remove(sub)
        sub.close()

    def read_events(self, group_id: str, from_seq: int = 1) -> list[EventRecord]:
        with self._lock_for(group_id):
            self._session(group_id)
            return self.store.read_events(group_id, from_seq)

    def group_ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._groups)

    def session_snapshot(self, group_id: str) -> GroupSession:
        """Deep-enough copy for equality checks; history entries are immutable."""
        with self._lock_for(group_id):
            session = self._session(group_id)
            return GroupSession(
                group_id=session.group_id,
                human_roster=set(session.human_roster),
                agent_roster=set(session.agent_roster),
                next_seq=session.next_seq,
                history=list(session.history),
            )

    def close(self) -> None:
        with self._registry_lock:
            all_subs = [s for subs in self._subs.values() for s in subs]
            self._subs.clear()
        for sub in all_subs:
            sub.close()
        self.store.close()
