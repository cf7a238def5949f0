import pytest

from gcagent.config import DEFAULTS, Config


def test_defaults_available_without_file():
    config = Config()
    assert config.get("engine.backend") == "mock"
    assert config.get_int("manager.context_window") == 30
    assert config.get_bool("manager.reply_triggers") is True


def test_file_overrides_and_comments(tmp_path):
    path = tmp_path / "svc.cfg"
    path.write_text(
        "# comment\n"
        "engine.backend = remote\n"
        "\n"
        "server.port=9000\n"
        "custom.flag = yes\n"
    )
    config = Config.load(path)
    assert config.get("engine.backend") == "remote"
    assert config.get_int("server.port") == 9000
    assert config.get_bool("custom.flag") is True
    # untouched keys keep their defaults
    assert config.get("engine.model") == DEFAULTS["engine.model"]


def test_malformed_line_rejected(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("engine.backend remote\n")
    with pytest.raises(ValueError):
        Config.load(path)


def test_numeric_and_bool_parse_errors():
    config = Config({"engine.timeout_ms": "soon", "server.fsync": "perhaps"})
    with pytest.raises(ValueError):
        config.get_int("engine.timeout_ms")
    with pytest.raises(ValueError):
        config.get_bool("server.fsync")


def test_unknown_key():
    with pytest.raises(KeyError):
        Config().get("no.such.key")
