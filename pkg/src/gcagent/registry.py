"""Agent profiles, the voice-style catalog, and the registry behind the agent square.

Profiles are immutable once created. Names are unique case-insensitively
across the whole registry so that @-mention resolution is unambiguous.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import InvalidName, InvalidPersona, UnknownVoiceStyle

MAX_NAME_LEN = 32
MAX_PERSONA_LEN = 2000

# Namespace for deterministic seed-catalog agent ids; keeps rosters replayable
# across restarts without persisting the seed agents themselves.
_SEED_NS = uuid.UUID("6ba7b810-9dad-11d1-80b4-00c04fd430c8")
SEED_CREATED_AT = 0  # catalog entries sort before every runtime creation


class Category(str, Enum):
    ENTERTAINMENT = "entertainment"
    UTILITY = "utility"


@dataclass(frozen=True)
class VoiceStyle:
    style_id: str
    label: str
    synthesis_hint: str


DEFAULT_VOICE_STYLES: tuple[VoiceStyle, ...] = (
    VoiceStyle("warm-female", "Warm female", "f0:warm"),
    VoiceStyle("bright-male", "Bright male", "m0:bright"),
    VoiceStyle("deep-male", "Deep male", "m1:deep"),
    VoiceStyle("soft-female", "Soft female", "f1:soft"),
    VoiceStyle("songful", "Songful", "sing:melodic"),
)


@dataclass(frozen=True)
class AgentProfile:
    agent_id: str
    name: str
    persona: str
    category: Category
    creator_id: str
    created_at: int  # UTC milliseconds
    greeting: str | None = None
    voice_style_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "name": self.name,
            "persona": self.persona,
            "category": self.category.value,
            "creator_id": self.creator_id,
            "created_at": self.created_at,
            "greeting": self.greeting,
            "voice_style_id": self.voice_style_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AgentProfile":
        return cls(
            agent_id=data["agent_id"],
            name=data["name"],
            persona=data["persona"],
            category=Category(data["category"]),
            creator_id=data["creator_id"],
            created_at=data["created_at"],
            greeting=data.get("greeting"),
            voice_style_id=data.get("voice_style_id"),
        )


def _now_ms() -> int:
    return time.time_ns() // 1_000_000


class AgentRegistry:
    """Create, validate, and catalog dialogue agents.

    Reads are safe from any thread; writes are serialized on an internal lock
    (single-writer contract). ``persist_path`` appends created profiles as
    JSON lines so a restarted process sees the same registry.
    """

    def __init__(
        self,
        voice_styles: Iterable[VoiceStyle] = DEFAULT_VOICE_STYLES,
        persist_path: str | Path | None = None,
    ):
        self._lock = threading.Lock()
        self._by_id: dict[str, AgentProfile] = {}
        self._names: dict[str, str] = {}  # lowered name -> agent_id
        self._voice_styles = {vs.style_id: vs for vs in voice_styles}
        self._persist_path = Path(persist_path) if persist_path else None
        if self._persist_path and self._persist_path.exists():
            for line in self._persist_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._admit(AgentProfile.from_dict(json.loads(line)))

    # -- creation -----------------------------------------------------------

    def create_agent(
        self,
        name: str,
        persona: str,
        category: Category | str,
        creator_id: str = "anonymous",
        greeting: str | None = None,
        voice_style_id: str | None = None,
    ) -> AgentProfile:
        profile = self._validated(
            name, persona, category, creator_id, greeting, voice_style_id,
            agent_id=uuid.uuid4().hex, created_at=_now_ms(),
        )
        with self._lock:
            if profile.name.lower() in self._names:
                raise InvalidName(f"duplicate agent name: {profile.name!r}")
            self._admit(profile)
            if self._persist_path:
                with self._persist_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(profile.to_dict(), ensure_ascii=False) + "\n")
        return profile

    def _validated(
        self, name, persona, category, creator_id, greeting, voice_style_id,
        agent_id: str, created_at: int,
    ) -> AgentProfile:
        name = (name or "").strip()
        if not name:
            raise InvalidName("agent name is empty")
        if len(name) > MAX_NAME_LEN:
            raise InvalidName(f"agent name exceeds {MAX_NAME_LEN} characters")
        persona = persona or ""
        if not persona.strip():
            raise InvalidPersona("persona is empty")
        if len(persona) > MAX_PERSONA_LEN:
            raise InvalidPersona(f"persona exceeds {MAX_PERSONA_LEN} characters")
        category = Category(category)  # ValueError for anything but the two values
        if voice_style_id is not None and voice_style_id not in self._voice_styles:
            raise UnknownVoiceStyle(voice_style_id)
        return AgentProfile(
            agent_id=agent_id,
            name=name,
            persona=persona,
            category=category,
            creator_id=creator_id,
            created_at=created_at,
            greeting=greeting,
            voice_style_id=voice_style_id,
        )

    def _admit(self, profile: AgentProfile) -> None:
        lowered = profile.name.lower()
        if lowered in self._names:
            return  # restart replay: seed + persisted may overlap
        self._by_id[profile.agent_id] = profile
        self._names[lowered] = profile.agent_id

    # -- lookup ---------------------------------------------------------------

    def get(self, agent_id: str) -> AgentProfile | None:
        return self._by_id.get(agent_id)

    def by_name(self, name: str) -> AgentProfile | None:
        agent_id = self._names.get(name.strip().lower())
        return self._by_id.get(agent_id) if agent_id else None

    def list_catalog(self, category_filter: Category | str | None = None) -> list[AgentProfile]:
        """All profiles matching the filter, ordered by (created_at, agent_id)."""
        wanted = Category(category_filter) if category_filter is not None else None
        profiles = [
            p for p in self._by_id.values()
            if wanted is None or p.category is wanted
        ]
        profiles.sort(key=lambda p: (p.created_at, p.agent_id))
        return profiles

    def voice_style(self, style_id: str) -> VoiceStyle | None:
        return self._voice_styles.get(style_id)

    def voice_styles(self) -> list[VoiceStyle]:
        return list(self._voice_styles.values())

    # -- seed catalog ---------------------------------------------------------

    def load_seed_catalog(self, path: str | Path | None = None) -> int:
        """Load predefined agents from a JSON array of drafts.

        Seed entries get deterministic ids (UUID5 of the lowered name) and
        created_at=0 so rosters recorded in event logs stay resolvable after a
        restart. Entries whose name is already taken are skipped. Returns the
        number of profiles admitted.
        """
        if path:
            raw = Path(path).read_text(encoding="utf-8")
        else:
            raw = resources.files("gcagent.data").joinpath("seed_agents.json").read_text("utf-8")
        drafts = json.loads(raw)
        admitted = 0
        with self._lock:
            for draft in drafts:
                profile = self._validated(
                    draft["name"],
                    draft["persona"],
                    draft.get("category", "entertainment"),
                    draft.get("creator_id", "system"),
                    draft.get("greeting"),
                    draft.get("voice_style_id"),
                    agent_id=uuid.uuid5(_SEED_NS, draft["name"].strip().lower()).hex,
                    created_at=SEED_CREATED_AT,
                )
                if profile.name.lower() not in self._names:
                    self._admit(profile)
                    admitted += 1
        return admitted
