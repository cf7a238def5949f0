"""Online metrics from event logs: A/B improvements, retention, role popularity.

Everything here is a pure batch scan over EventRecord lists; loading from a
log directory lives in the events module. Percentages are rounded half-up to
two decimals at the edge, never mid-computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from enum import Enum

from .errors import EmptyCohort, ZeroBaseline
from .evaluation import round_half_up
from .events import EventRecord, EventType

MS_PER_DAY = 86_400_000


class Metric(str, Enum):
    GROUP_ACTIVITY = "GroupActivity"
    NEW_GROUP_CREATION = "NewGroupCreation"
    MESSAGE_READERSHIP = "MessageReadership"
    MESSAGE_VOLUMES = "MessageVolumes"


@dataclass(frozen=True)
class MetricReport:
    metric: Metric
    control_value: float
    treatment_value: float
    improvement_pct: Decimal

    def to_dict(self) -> dict:
        return {
            "metric": self.metric.value,
            "control": self.control_value,
            "treatment": self.treatment_value,
            "improvement_pct": float(self.improvement_pct),
        }


@dataclass(frozen=True)
class RetentionReport:
    horizon_days: int
    cohort_size: int
    retained: int
    rate_pct: Decimal

    def to_dict(self) -> dict:
        return {
            "horizon_days": self.horizon_days,
            "cohort_size": self.cohort_size,
            "retained": self.retained,
            "rate_pct": float(self.rate_pct),
        }


@dataclass(frozen=True)
class AgentInfo:
    agent_id: str
    name: str
    category: str


@dataclass(frozen=True)
class RoleDistribution:
    entries: tuple[tuple[str, str, int], ...]  # (name, category, reply count)
    category_share: dict[str, Decimal]

    def to_dict(self) -> dict:
        return {
            "entries": [
                {"name": n, "category": c, "interactions": k}
                for n, c, k in self.entries
            ],
            "category_share": {c: float(v) for c, v in self.category_share.items()},
        }


def compute_improvement(control: float, treatment: float) -> Decimal:
    """(treatment - control) / control x 100, half-up to 2 decimals."""
    if control <= 0:
        raise ZeroBaseline(f"control value {control} is not positive")
    c = Decimal(str(control))
    t = Decimal(str(treatment))
    return round_half_up((t - c) / c * 100)


def metric_values(events: list[EventRecord], metric: Metric, min_messages: int = 1,
                  include_agent_replies: bool = True) -> float:
    if metric is Metric.MESSAGE_VOLUMES:
        counted = {EventType.MESSAGE_POSTED}
        if include_agent_replies:
            counted.add(EventType.AGENT_REPLIED)
        return float(sum(1 for e in events if e.event_type in counted))
    if metric is Metric.NEW_GROUP_CREATION:
        return float(sum(1 for e in events if e.event_type is EventType.GROUP_CREATED))
    if metric is Metric.MESSAGE_READERSHIP:
        views = {
            (e.payload["user_id"], e.payload["msg_id"])
            for e in events
            if e.event_type is EventType.MESSAGE_VIEWED
        }
        return float(len(views))
    if metric is Metric.GROUP_ACTIVITY:
        groups = {e.group_id for e in events}
        if not groups:
            return 0.0
        posted: dict[str, int] = {}
        for e in events:
            if e.event_type is EventType.MESSAGE_POSTED:
                posted[e.group_id] = posted.get(e.group_id, 0) + 1
        active = sum(1 for g in groups if posted.get(g, 0) >= min_messages)
        return active / len(groups)
    raise ValueError(f"unhandled metric: {metric}")


def ab_report(
    control: list[EventRecord],
    treatment: list[EventRecord],
    min_messages: int = 1,
    include_agent_replies: bool = True,
) -> list[MetricReport]:
    reports = []
    for metric in (
        Metric.GROUP_ACTIVITY,
        Metric.NEW_GROUP_CREATION,
        Metric.MESSAGE_READERSHIP,
        Metric.MESSAGE_VOLUMES,
    ):
        c = metric_values(control, metric, min_messages, include_agent_replies)
        t = metric_values(treatment, metric, min_messages, include_agent_replies)
        reports.append(MetricReport(metric, c, t, compute_improvement(c, t)))
    return reports


def _day_index(ts_ms: int) -> int:
    return ts_ms // MS_PER_DAY  # UTC calendar day


def retention(events: list[EventRecord], horizons: tuple[int, ...] = (1, 3, 7)) -> list[RetentionReport]:
    """Day-0 joiner cohort vs. posting activity on later calendar days.

    Day 0 is the UTC calendar day of the earliest join in the log.
    """
    joins = [e for e in events if e.event_type is EventType.PARTICIPANT_JOINED]
    if not joins:
        raise EmptyCohort("no join events in log")
    day_zero = min(_day_index(e.ts) for e in joins)
    cohort = {
        e.payload["user_id"] for e in joins if _day_index(e.ts) == day_zero
    }
    posts_by_day: dict[int, set[str]] = {}
    for e in events:
        if e.event_type is EventType.MESSAGE_POSTED:
            day = _day_index(e.ts) - day_zero
            posts_by_day.setdefault(day, set()).add(e.payload["message"]["sender"])
    reports = []
    for horizon in horizons:
        retained = len(cohort & posts_by_day.get(horizon, set()))
        reports.append(
            RetentionReport(
                horizon_days=horizon,
                cohort_size=len(cohort),
                retained=retained,
                rate_pct=round_half_up(Decimal(retained) * 100 / Decimal(len(cohort))),
            )
        )
    return reports


def agents_from_events(events: list[EventRecord]) -> list[AgentInfo]:
    """Distinct agents as recorded by attachment snapshots, first seen wins."""
    seen: dict[str, AgentInfo] = {}
    for e in events:
        if e.event_type is EventType.AGENT_ATTACHED:
            agent_id = e.payload["agent_id"]
            if agent_id not in seen:
                seen[agent_id] = AgentInfo(
                    agent_id=agent_id,
                    name=e.payload.get("name", agent_id),
                    category=e.payload.get("category", "entertainment"),
                )
    return list(seen.values())


def role_distribution(
    agents: list[AgentInfo], events: list[EventRecord], top_k: int = 20
) -> RoleDistribution:
    """Agents ranked by reply count (ties by name); shares over all agents."""
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    counts = {a.agent_id: 0 for a in agents}
    for e in events:
        if e.event_type is EventType.AGENT_REPLIED:
            agent_id = e.payload["agent_id"]
            if agent_id in counts:
                counts[agent_id] += 1
    ranked = sorted(agents, key=lambda a: (-counts[a.agent_id], a.name))
    entries = tuple(
        (a.name, a.category, counts[a.agent_id]) for a in ranked[:top_k]
    )
    share: dict[str, Decimal] = {}
    if agents:
        total = Decimal(len(agents))
        by_category: dict[str, int] = {}
        for a in agents:
            by_category[a.category] = by_category.get(a.category, 0) + 1
        share = {
            c: round_half_up(Decimal(n) * 100 / total)
            for c, n in sorted(by_category.items())
        }
    return RoleDistribution(entries=entries, category_share=share)
