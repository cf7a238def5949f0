import json
import threading

import httpx
import pytest
from fastapi.testclient import TestClient

from gcagent.server import create_app


@pytest.fixture
def client(service):
    app = create_app(service)
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def agent_id_by_name(client, name):
    agents = client.get("/agents").json()["agents"]
    return next(a["agent_id"] for a in agents if a["name"] == name)


def make_room(client, users=("alice",), agents=("DJ Nova",)):
    gid = client.post("/groups").json()["group_id"]
    for user in users:
        assert client.post(f"/groups/{gid}/join", json={"user_id": user}).status_code == 200
    ids = []
    for name in agents:
        aid = agent_id_by_name(client, name)
        assert client.post(f"/groups/{gid}/agents/{aid}").status_code == 200
        ids.append(aid)
    return gid, ids


# -- agent endpoints ---------------------------------------------------------


def test_agent_create_and_list(client):
    response = client.post(
        "/agents",
        json={
            "name": "Quiz Owl",
            "persona": "Asks sharp trivia questions and keeps score.",
            "category": "entertainment",
            "creator_id": "alice",
        },
    )
    assert response.status_code == 201
    created = response.json()
    assert created["name"] == "Quiz Owl"
    assert created["agent_id"]

    names = [a["name"] for a in client.get("/agents").json()["agents"]]
    assert "Quiz Owl" in names


def test_agent_duplicate_name_conflicts(client):
    body = {
        "name": "Twin Bot",
        "persona": "A perfectly ordinary bot.",
        "category": "utility",
    }
    assert client.post("/agents", json=body).status_code == 201
    second = client.post("/agents", json=body)
    assert second.status_code == 409
    assert second.json()["error"] == "InvalidName"


def test_agent_bad_inputs_are_400(client):
    bad_category = client.post(
        "/agents",
        json={"name": "X1", "persona": "Fine persona text.", "category": "sports"},
    )
    assert bad_category.status_code == 400

    bad_style = client.post(
        "/agents",
        json={
            "name": "X2",
            "persona": "Fine persona text.",
            "category": "utility",
            "voice_style_id": "not-a-style",
        },
    )
    assert bad_style.status_code == 400
    assert bad_style.json()["error"] == "UnknownVoiceStyle"


def test_agent_category_filter(client):
    agents = client.get("/agents", params={"category": "utility"}).json()["agents"]
    assert agents and all(a["category"] == "utility" for a in agents)


# -- group endpoints -----------------------------------------------------------


def test_group_lifecycle_roundtrip(client):
    gid, (aid,) = make_room(client)
    members = client.post(f"/groups/{gid}/join", json={"user_id": "bob"}).json()["members"]
    assert members == ["alice", "bob"]

    posted = client.post(
        f"/groups/{gid}/messages", json={"sender": "alice", "body": "@DJ Nova hello"}
    )
    assert posted.status_code == 201
    payload = posted.json()
    assert payload["message"]["seq"] == 1
    assert len(payload["replies"]) == 1
    assert payload["replies"][0]["sender"] == aid

    messages = client.get(f"/groups/{gid}/messages").json()["messages"]
    assert [m["seq"] for m in messages] == [1, 2]

    tail = client.get(f"/groups/{gid}/messages", params={"from_seq": 2}).json()["messages"]
    assert [m["seq"] for m in tail] == [2]


def test_view_endpoint(client):
    gid, _ = make_room(client)
    msg = client.post(
        f"/groups/{gid}/messages", json={"sender": "alice", "body": "look at me"}
    ).json()["message"]
    ok = client.post(f"/groups/{gid}/views", json={"user_id": "alice", "msg_id": msg["msg_id"]})
    assert ok.status_code == 201
    missing = client.post(f"/groups/{gid}/views", json={"user_id": "alice", "msg_id": "nope"})
    assert missing.status_code == 404
    assert missing.json()["error"] == "UnknownMessage"


def test_http_error_mapping(client):
    assert client.post("/groups/missing/join", json={"user_id": "a"}).status_code == 404
    assert client.get("/groups/missing/messages").status_code == 404

    gid, _ = make_room(client)
    aid_missing = client.post(f"/groups/{gid}/agents/ghost")
    assert aid_missing.status_code == 404
    assert aid_missing.json()["error"] == "UnknownAgent"

    stranger = client.post(f"/groups/{gid}/messages", json={"sender": "mallory", "body": "hi"})
    assert stranger.status_code == 400
    assert stranger.json()["error"] == "UnknownSender"

    bad_reply = client.post(
        f"/groups/{gid}/messages",
        json={"sender": "alice", "body": "hi", "reply_to": "bogus"},
    )
    assert bad_reply.status_code == 404
    assert bad_reply.json()["error"] == "UnknownReplyTarget"

    oversize = client.post(
        f"/groups/{gid}/messages", json={"sender": "alice", "body": "x" * 5000}
    )
    assert oversize.status_code == 400
    assert oversize.json()["error"] == "InvalidBody"


# -- plugin endpoints -------------------------------------------------------------


def test_plugin_roundtrip_over_http(client):
    gid, _ = make_room(client)
    tts = client.post(
        "/plugins/tts",
        json={"text": "hello out there", "voice_style_id": "warm-host", "group_id": gid},
    )
    assert tts.status_code == 200
    blob = tts.json()["audio_ref"]
    assert blob.startswith("stub-audio:v1:tts:")

    asr = client.post("/plugins/asr", json={"audio_ref": blob})
    assert asr.status_code == 200
    assert asr.json()["text"] == "hello out there"


def test_plugin_error_mapping(client):
    unknown = client.post("/plugins/teleport", json={"text": "x"})
    assert unknown.status_code == 404
    assert unknown.json()["error"] == "UnsupportedPlugin"

    malformed = client.post("/plugins/asr", json={"audio_ref": "stub-audio:v1:zzz"})
    assert malformed.status_code == 400
    assert malformed.json()["error"] == "MalformedBlob"

    # tts without text violates the request shape
    empty = client.post("/plugins/tts", json={})
    assert empty.status_code == 400


def test_foreign_audio_transcribes_to_marker(client):
    response = client.post("/plugins/asr", json={"audio_ref": "someone-elses-bytes"})
    assert response.status_code == 200
    assert response.json()["text"] == "[unrecognized audio]"
    assert response.json()["metadata"] == {"foreign": True}


# -- event streaming over a live server ----------------------------------------------


def read_frames(response, count, lines=None):
    frames = []
    for line in lines if lines is not None else response.iter_lines():
        if not line.strip():
            continue  # keepalive
        frames.append(json.loads(line))
        if len(frames) == count:
            break
    return frames


def test_stream_backlog_and_live_frames(live_server):
    base = live_server.base_url
    with httpx.Client(base_url=base, timeout=10) as api:
        gid = api.post("/groups").json()["group_id"]
        api.post(f"/groups/{gid}/join", json={"user_id": "alice"})
        agents = api.get("/agents").json()["agents"]
        aid = next(a["agent_id"] for a in agents if a["name"] == "DJ Nova")
        api.post(f"/groups/{gid}/agents/{aid}")

        with httpx.Client(timeout=10) as stream_client:
            with stream_client.stream("GET", f"{base}/groups/{gid}/events") as response:
                lines = response.iter_lines()
                backlog = read_frames(response, 3, lines)
                assert [f["event_type"] for f in backlog] == [
                    "GroupCreated",
                    "ParticipantJoined",
                    "AgentAttached",
                ]

                api.post(
                    f"/groups/{gid}/messages",
                    json={"sender": "alice", "body": "@DJ Nova say hi"},
                )
                live = read_frames(response, 2, lines)
                assert [f["event_type"] for f in live] == ["MessagePosted", "AgentReplied"]
                assert [f["seq"] for f in live] == [4, 5]
                assert live[1]["payload"]["message"]["reply_to"] == live[0]["payload"]["message"]["msg_id"]


def test_stream_frames_match_log_lines(live_server):
    base = live_server.base_url
    service = live_server.service
    with httpx.Client(base_url=base, timeout=10) as api:
        gid = api.post("/groups").json()["group_id"]
        api.post(f"/groups/{gid}/join", json={"user_id": "alice"})
        api.post(f"/groups/{gid}/messages", json={"sender": "alice", "body": "for the record"})

        with api.stream("GET", f"{base}/groups/{gid}/events") as response:
            frames = read_frames(response, 3)
    stored = [json.loads(e.to_line()) for e in service.read_events(gid)]
    assert frames == stored


def test_stream_from_seq_offset(live_server):
    base = live_server.base_url
    with httpx.Client(base_url=base, timeout=10) as api:
        gid = api.post("/groups").json()["group_id"]
        api.post(f"/groups/{gid}/join", json={"user_id": "alice"})
        api.post(f"/groups/{gid}/messages", json={"sender": "alice", "body": "one"})
        with api.stream(
            "GET", f"{base}/groups/{gid}/events", params={"from_seq": 3}
        ) as response:
            frames = read_frames(response, 1)
        assert frames[0]["seq"] == 3
        assert frames[0]["event_type"] == "MessagePosted"


def test_stream_unknown_group_404(live_server):
    response = httpx.get(f"{live_server.base_url}/groups/ghost/events", timeout=10)
    assert response.status_code == 404


def test_stream_sends_keepalive_blanks_when_idle(live_server):
    # live_server runs with keepalive_ms=200, so an idle second has blanks
    base = live_server.base_url
    with httpx.Client(base_url=base, timeout=10) as api:
        gid = api.post("/groups").json()["group_id"]
        blanks = 0
        with api.stream("GET", f"{base}/groups/{gid}/events") as response:
            for i, line in enumerate(response.iter_lines()):
                if not line.strip():
                    blanks += 1
                    if blanks >= 2:
                        break
                if i > 50:
                    break
        assert blanks >= 2


def test_stream_close_frame_on_service_close(live_server):
    base = live_server.base_url
    with httpx.Client(base_url=base, timeout=10) as api:
        gid = api.post("/groups").json()["group_id"]

        got = {}

        def consume():
            with httpx.Client(timeout=10) as c:
                with c.stream("GET", f"{base}/groups/{gid}/events") as response:
                    for line in response.iter_lines():
                        if not line.strip():
                            continue
                        frame = json.loads(line)
                        if frame["event_type"] == "StreamClosed":
                            got["close"] = frame
                            return
                        got.setdefault("events", []).append(frame)

        reader = threading.Thread(target=consume)
        reader.start()
        deadline = threading.Event()
        # wait for the subscriber to land before closing
        for _ in range(100):
            if got.get("events"):
                break
            deadline.wait(0.05)
        live_server.service.close()
        reader.join(timeout=10)
        assert not reader.is_alive()
        assert got["close"]["group_id"] == gid
