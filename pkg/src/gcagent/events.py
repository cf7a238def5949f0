"""Append-only event log: one line-delimited JSON file per group.

The same record shape is used on disk and on the wire, so a subscriber frame,
a log line, and a replay input are all the same thing. Writes go to the end
of the file and are flushed before the append returns; reads are forward
scans from a sequence number. Per-group event seqs are strictly increasing
and gap-free, starting at 1.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import CorruptLog, SequenceViolation, StorageFailure, UnknownGroup


class EventType(str, Enum):
    GROUP_CREATED = "GroupCreated"
    PARTICIPANT_JOINED = "ParticipantJoined"
    AGENT_ATTACHED = "AgentAttached"
    MESSAGE_POSTED = "MessagePosted"
    AGENT_REPLIED = "AgentReplied"
    PLUGIN_INVOKED = "PluginInvoked"
    MESSAGE_VIEWED = "MessageViewed"


@dataclass(frozen=True)
class EventRecord:
    event_type: EventType
    group_id: str
    seq: int
    payload: dict
    ts: int  # UTC milliseconds

    def to_dict(self) -> dict:
        return {
            "event_type": self.event_type.value,
            "group_id": self.group_id,
            "seq": self.seq,
            "payload": self.payload,
            "ts": self.ts,
        }

    def to_line(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "EventRecord":
        try:
            event_type = EventType(data["event_type"])
        except (KeyError, ValueError) as exc:
            raise CorruptLog(f"unknown event type: {data.get('event_type')!r}") from exc
        try:
            return cls(
                event_type=event_type,
                group_id=data["group_id"],
                seq=int(data["seq"]),
                payload=data["payload"],
                ts=int(data["ts"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptLog(f"malformed event record: {exc}") from exc


def _now_ms() -> int:
    return time.time_ns() // 1_000_000


class EventStore:
    """Per-group append-only logs under a data directory.

    Thread-safe; the caller is expected to serialize appends per group anyway
    (one command loop per group), the internal lock is a backstop that makes
    the SequenceViolation check race-free.
    """

    def __init__(self, data_dir: str | Path, fsync: bool = False):
        self._dir = Path(data_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._fsync = fsync
        self._lock = threading.Lock()
        self._events: dict[str, list[EventRecord]] = {}
        self._files: dict[str, object] = {}
        self._load_existing()

    def _load_existing(self) -> None:
        for path in sorted(self._dir.glob("*.ndjson")):
            group_id = path.stem
            records = list(parse_log_lines(path.read_text(encoding="utf-8").splitlines()))
            verify_contiguous(records)
            self._events[group_id] = records

    def _file_for(self, group_id: str):
        fh = self._files.get(group_id)
        if fh is None:
            fh = (self._dir / f"{group_id}.ndjson").open("a", encoding="utf-8")
            self._files[group_id] = fh
        return fh

    # -- writing ---------------------------------------------------------------

    def next_seq(self, group_id: str) -> int:
        with self._lock:
            log = self._events.get(group_id)
            return (log[-1].seq + 1) if log else 1

    def append_event(self, record: EventRecord) -> int:
        """Durably append one record; returns its position in the group log."""
        with self._lock:
            log = self._events.setdefault(record.group_id, [])
            expected = log[-1].seq + 1 if log else 1
            if record.seq != expected:
                raise SequenceViolation(
                    f"group {record.group_id}: expected seq {expected}, got {record.seq}"
                )
            try:
                fh = self._file_for(record.group_id)
                fh.write(record.to_line() + "\n")
                fh.flush()
                if self._fsync:
                    os.fsync(fh.fileno())
            except OSError as exc:
                raise StorageFailure(str(exc)) from exc
            log.append(record)
            return record.seq

    def emit(self, group_id: str, event_type: EventType, payload: dict, ts: int | None = None) -> EventRecord:
        """Build the next record for the group and append it."""
        with self._lock:
            log = self._events.setdefault(group_id, [])
            seq = log[-1].seq + 1 if log else 1
            record = EventRecord(event_type, group_id, seq, payload, ts if ts is not None else _now_ms())
            try:
                fh = self._file_for(group_id)
                fh.write(record.to_line() + "\n")
                fh.flush()
                if self._fsync:
                    os.fsync(fh.fileno())
            except OSError as exc:
                raise StorageFailure(str(exc)) from exc
            log.append(record)
            return record

    # -- reading ---------------------------------------------------------------

    def read_events(self, group_id: str, from_seq: int = 1) -> list[EventRecord]:
        """All events for the group with seq >= from_seq, in seq order."""
        with self._lock:
            log = self._events.get(group_id)
            if log is None:
                raise UnknownGroup(group_id)
            if from_seq <= 1:
                return list(log)
            return log[from_seq - 1:]

    def group_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._events)

    def close(self) -> None:
        with self._lock:
            for fh in self._files.values():
                fh.close()
            self._files.clear()


def parse_log_lines(lines: Iterable[str]) -> Iterable[EventRecord]:
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptLog(f"line {lineno}: invalid JSON: {exc}") from exc
        yield EventRecord.from_dict(data)


def verify_contiguous(records: list[EventRecord]) -> None:
    """Event seqs must be exactly 1..n in order."""
    for i, record in enumerate(records, 1):
        if record.seq != i:
            raise CorruptLog(f"event seq gap or disorder: expected {i}, got {record.seq}")


def load_log_dir(path: str | Path) -> list[EventRecord]:
    """All events from every *.ndjson file in a directory (analytics input)."""
    records: list[EventRecord] = []
    for file in sorted(Path(path).glob("*.ndjson")):
        records.extend(parse_log_lines(file.read_text(encoding="utf-8").splitlines()))
    return records
