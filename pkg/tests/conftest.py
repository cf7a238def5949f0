from __future__ import annotations

import threading
import time

import pytest
import uvicorn

from gcagent.config import Config
from gcagent.engine import MockEngine
from gcagent.server import create_app
from gcagent.service import ChatService


def make_service(tmp_path, **overrides) -> ChatService:
    values = {"server.data_dir": str(tmp_path / "data")}
    values.update(overrides)
    return ChatService(Config(values), engine=MockEngine(seed=0))


@pytest.fixture
def service(tmp_path):
    svc = make_service(tmp_path)
    yield svc
    svc.close()


class LiveServer:
    def __init__(self, service: ChatService):
        self.service = service
        app = create_app(service)
        self._server = uvicorn.Server(
            uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
        )
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    def start(self) -> "LiveServer":
        self._thread.start()
        deadline = time.monotonic() + 10
        while not self._server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        sock = self._server.servers[0].sockets[0]
        self.base_url = f"http://127.0.0.1:{sock.getsockname()[1]}"
        return self

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)


@pytest.fixture
def live_server(tmp_path):
    svc = make_service(tmp_path, **{"server.keepalive_ms": "200"})
    server = LiveServer(svc).start()
    yield server
    server.stop()
    svc.close()
