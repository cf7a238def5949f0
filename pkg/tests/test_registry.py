import pytest

from gcagent.errors import InvalidName, InvalidPersona, UnknownVoiceStyle
from gcagent.registry import (
    MAX_NAME_LEN,
    MAX_PERSONA_LEN,
    AgentRegistry,
    Category,
)


@pytest.fixture
def registry():
    return AgentRegistry()


def test_create_agent_assigns_id_and_timestamp(registry):
    profile = registry.create_agent("DJ Bot", "plays music", Category.ENTERTAINMENT)
    assert profile.agent_id
    assert profile.created_at > 0
    assert registry.get(profile.agent_id) == profile


def test_empty_name_rejected(registry):
    with pytest.raises(InvalidName):
        registry.create_agent("", "a DJ", Category.ENTERTAINMENT)
    with pytest.raises(InvalidName):
        registry.create_agent("   ", "a DJ", Category.ENTERTAINMENT)


def test_name_length_cap(registry):
    registry.create_agent("x" * MAX_NAME_LEN, "ok", Category.UTILITY)
    with pytest.raises(InvalidName):
        registry.create_agent("x" * (MAX_NAME_LEN + 1), "ok", Category.UTILITY)


def test_persona_required_and_capped(registry):
    with pytest.raises(InvalidPersona):
        registry.create_agent("A", "", Category.UTILITY)
    with pytest.raises(InvalidPersona):
        registry.create_agent("B", "p" * (MAX_PERSONA_LEN + 1), Category.UTILITY)


def test_duplicate_name_case_insensitive(registry):
    registry.create_agent("dj bot", "one", Category.ENTERTAINMENT)
    with pytest.raises(InvalidName):
        registry.create_agent("DJ Bot", "two", Category.ENTERTAINMENT)


def test_unknown_category_rejected(registry):
    with pytest.raises(ValueError):
        registry.create_agent("A", "p", "philosophy")


def test_unknown_voice_style(registry):
    with pytest.raises(UnknownVoiceStyle):
        registry.create_agent(
            "A", "p", Category.ENTERTAINMENT, voice_style_id="nope"
        )


def test_known_voice_style_accepted(registry):
    profile = registry.create_agent(
        "A", "p", Category.ENTERTAINMENT, voice_style_id="warm-female"
    )
    assert registry.voice_style(profile.voice_style_id).label == "Warm female"


def test_agent_ids_distinct(registry):
    ids = {
        registry.create_agent(f"agent {i}", "p", Category.UTILITY).agent_id
        for i in range(25)
    }
    assert len(ids) == 25


def test_list_catalog_empty():
    assert AgentRegistry().list_catalog() == []


def test_list_catalog_order_and_filter(registry):
    a = registry.create_agent("Zeta", "p", Category.UTILITY)
    b = registry.create_agent("Alpha", "p", Category.ENTERTAINMENT)
    catalog = registry.list_catalog()
    assert [p.agent_id for p in catalog] == sorted(
        [a.agent_id, b.agent_id],
        key=lambda i: (registry.get(i).created_at, i),
    )
    assert registry.list_catalog(Category.UTILITY) == [a]
    assert registry.list_catalog("entertainment") == [b]


def test_category_partition(registry):
    for i in range(10):
        registry.create_agent(
            f"a{i}", "p", Category.ENTERTAINMENT if i % 3 else Category.UTILITY
        )
    both = registry.list_catalog(Category.ENTERTAINMENT) + registry.list_catalog(
        Category.UTILITY
    )
    assert sorted(p.agent_id for p in both) == sorted(
        p.agent_id for p in registry.list_catalog()
    )


def test_read_your_writes(registry):
    profile = registry.create_agent("Fresh", "p", Category.UTILITY)
    assert profile in registry.list_catalog()


def test_seed_catalog_contents(registry):
    admitted = registry.load_seed_catalog()
    assert admitted >= 20
    utility = registry.list_catalog(Category.UTILITY)
    assert {p.name for p in utility} == {
        "Group Leader's Secretary",
        "Universal Q&A Expert",
    }
    entertainment = registry.list_catalog(Category.ENTERTAINMENT)
    assert len(entertainment) == admitted - 2


def test_seed_catalog_idempotent(registry):
    registry.load_seed_catalog()
    first = {p.agent_id for p in registry.list_catalog()}
    assert registry.load_seed_catalog() == 0
    assert {p.agent_id for p in registry.list_catalog()} == first


def test_seed_ids_stable_across_instances():
    r1, r2 = AgentRegistry(), AgentRegistry()
    r1.load_seed_catalog()
    r2.load_seed_catalog()
    assert {p.agent_id for p in r1.list_catalog()} == {
        p.agent_id for p in r2.list_catalog()
    }


def test_persistence_roundtrip(tmp_path):
    path = tmp_path / "agents.jsonl"
    first = AgentRegistry(persist_path=path)
    created = first.create_agent("Kept", "persists", Category.UTILITY)
    second = AgentRegistry(persist_path=path)
    assert second.get(created.agent_id) == created
