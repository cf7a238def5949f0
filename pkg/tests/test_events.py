import json

import pytest

from gcagent.errors import CorruptLog, SequenceViolation, UnknownGroup
from gcagent.events import (
    EventRecord,
    EventStore,
    EventType,
    load_log_dir,
    parse_log_lines,
    verify_contiguous,
)


def test_append_and_read(tmp_path):
    store = EventStore(tmp_path)
    record = store.emit("g1", EventType.GROUP_CREATED, {})
    assert record.seq == 1
    assert store.read_events("g1") == [record]
    store.close()


def test_append_event_checks_sequence(tmp_path):
    store = EventStore(tmp_path)
    store.emit("g1", EventType.GROUP_CREATED, {})
    skipping = EventRecord(EventType.PARTICIPANT_JOINED, "g1", 3, {"user_id": "u"}, 0)
    with pytest.raises(SequenceViolation):
        store.append_event(skipping)
    ok = EventRecord(EventType.PARTICIPANT_JOINED, "g1", 2, {"user_id": "u"}, 0)
    assert store.append_event(ok) == 2
    store.close()


def test_read_unknown_group(tmp_path):
    store = EventStore(tmp_path)
    with pytest.raises(UnknownGroup):
        store.read_events("nope")
    store.close()


def test_read_from_seq_slicing(tmp_path):
    store = EventStore(tmp_path)
    store.emit("g1", EventType.GROUP_CREATED, {})
    for i in range(999):
        store.emit("g1", EventType.PARTICIPANT_JOINED, {"user_id": f"u{i}"})
    full = store.read_events("g1", from_seq=1)
    assert len(full) == 1000
    assert [e.seq for e in full] == list(range(1, 1001))
    k = 250
    tail = store.read_events("g1", from_seq=k)
    assert len(tail) == 1000 - k + 1
    assert tail[0].seq == k
    assert store.read_events("g1", from_seq=2000) == []
    store.close()


def test_reload_from_disk(tmp_path):
    store = EventStore(tmp_path)
    store.emit("g1", EventType.GROUP_CREATED, {})
    store.emit("g1", EventType.PARTICIPANT_JOINED, {"user_id": "alice"})
    store.emit("g2", EventType.GROUP_CREATED, {})
    store.close()

    reopened = EventStore(tmp_path)
    assert reopened.group_ids() == ["g1", "g2"]
    assert [e.event_type for e in reopened.read_events("g1")] == [
        EventType.GROUP_CREATED,
        EventType.PARTICIPANT_JOINED,
    ]
    reopened.emit("g1", EventType.PARTICIPANT_JOINED, {"user_id": "bob"})
    assert reopened.read_events("g1")[-1].seq == 3
    reopened.close()


def test_wire_format_is_one_json_object_per_line(tmp_path):
    store = EventStore(tmp_path)
    store.emit("g1", EventType.GROUP_CREATED, {})
    store.close()
    lines = (tmp_path / "g1.ndjson").read_text().splitlines()
    parsed = json.loads(lines[0])
    assert parsed["event_type"] == "GroupCreated"
    assert parsed["seq"] == 1


def test_parse_rejects_bad_json():
    with pytest.raises(CorruptLog):
        list(parse_log_lines(["{not json"]))


def test_parse_rejects_unknown_event_type():
    line = json.dumps(
        {"event_type": "Mystery", "group_id": "g", "seq": 1, "payload": {}, "ts": 0}
    )
    with pytest.raises(CorruptLog):
        list(parse_log_lines([line]))


def test_verify_contiguous_detects_gap():
    records = [
        EventRecord(EventType.GROUP_CREATED, "g", 1, {}, 0),
        EventRecord(EventType.PARTICIPANT_JOINED, "g", 3, {"user_id": "u"}, 0),
    ]
    with pytest.raises(CorruptLog):
        verify_contiguous(records)


def test_corrupt_file_detected_at_startup(tmp_path):
    good = EventStore(tmp_path)
    good.emit("g1", EventType.GROUP_CREATED, {})
    good.close()
    path = tmp_path / "g1.ndjson"
    line = json.dumps(
        {
            "event_type": "ParticipantJoined",
            "group_id": "g1",
            "seq": 5,
            "payload": {"user_id": "u"},
            "ts": 0,
        }
    )
    path.write_text(path.read_text() + line + "\n")
    with pytest.raises(CorruptLog):
        EventStore(tmp_path)


def test_load_log_dir(tmp_path):
    store = EventStore(tmp_path)
    store.emit("g1", EventType.GROUP_CREATED, {})
    store.emit("g2", EventType.GROUP_CREATED, {})
    store.emit("g2", EventType.PARTICIPANT_JOINED, {"user_id": "u"})
    store.close()
    events = load_log_dir(tmp_path)
    assert len(events) == 3
    assert {e.group_id for e in events} == {"g1", "g2"}
