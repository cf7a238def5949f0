"""Flat key-value configuration with package-wide defaults.

Config files are plain text: one ``key = value`` pair per line, ``#`` starts
a comment. Keys are dotted (``engine.timeout_ms``). Unknown keys are kept so
adapters can define their own.
"""

from __future__ import annotations

from pathlib import Path

DEFAULTS: dict[str, str] = {
    "registry.seed_path": "",          # empty -> packaged seed catalog
    "manager.context_window": "30",
    "manager.reply_triggers": "true",
    "engine.backend": "mock",          # mock | remote
    "engine.endpoint": "http://127.0.0.1:8001/v1/chat/completions",
    "engine.model": "group-chat-default",
    "engine.temperature": "0.7",
    "engine.max_tokens": "256",
    "engine.timeout_ms": "30000",
    "engine.credential_ref": "GCAGENT_API_KEY",
    "engine.mock_seed": "0",
    "validator.max_retries": "2",
    "validator.fallback_text": "Sorry, I don't have a good reply for that right now.",
    "validator.rules_path": "",
    "plugins.asr.adapter": "stub",
    "plugins.tts.adapter": "stub",
    "plugins.ttsing.adapter": "stub",
    "plugins.asr.endpoint": "",
    "plugins.tts.endpoint": "",
    "plugins.ttsing.endpoint": "",
    "server.data_dir": "./data",
    "server.host": "127.0.0.1",
    "server.port": "8040",
    "server.fsync": "false",
    "server.keepalive_ms": "15000",
    "eval.parallelism": "4",
    "analytics.activity_min_messages": "1",
    "analytics.count_agent_replies": "true",
}

_TRUTHY = {"1", "true", "yes", "on"}
_FALSY = {"0", "false", "no", "off"}


class Config:
    """Immutable view over defaults plus file/dict overrides."""

    def __init__(self, overrides: dict[str, str] | None = None):
        self._values = dict(DEFAULTS)
        if overrides:
            self._values.update({k.strip(): str(v).strip() for k, v in overrides.items()})

    @classmethod
    def load(cls, path: str | Path) -> "Config":
        overrides: dict[str, str] = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            overrides[key.strip()] = value.strip()
        return cls(overrides)

    def get(self, key: str, default: str | None = None) -> str:
        if key in self._values:
            return self._values[key]
        if default is not None:
            return default
        raise KeyError(key)

    def get_int(self, key: str) -> int:
        return int(self.get(key))

    def get_float(self, key: str) -> float:
        return float(self.get(key))

    def get_bool(self, key: str) -> bool:
        value = self.get(key).lower()
        if value in _TRUTHY:
            return True
        if value in _FALSY:
            return False
        raise ValueError(f"config key {key}: not a boolean: {value!r}")

    def as_dict(self) -> dict[str, str]:
        return dict(self._values)
