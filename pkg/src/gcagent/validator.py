"""Post-generation checks, light repair, and the bounded retry loop.

Rules are pure text predicates. A Repairable violation has a mechanical fix
(strip a leaked speaker label, truncate at a sentence boundary); a Fatal one
means the whole completion is unusable and the engine must be asked again.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .engine import Engine, Sampling, build_prompt
from .errors import ExhaustedRetries
from .manager import DialogueContext

DEFAULT_MAX_LENGTH = 1000
DEFAULT_REPEAT_LEN = 12
DEFAULT_REPEAT_COUNT = 4
DEFAULT_FALLBACK = "Sorry, I don't have a good reply for that right now."

# Characters that may end a truncated reply without leaving a dangling clause.
_SENTENCE_ENDS = ".!?…\n"


class RuleKind(str, Enum):
    EMPTY_CHECK = "EmptyCheck"
    LENGTH_CHECK = "LengthCheck"
    FORBIDDEN_PATTERN = "ForbiddenPattern"
    LABEL_LEAK = "LabelLeak"
    REPETITION = "Repetition"


class Severity(str, Enum):
    REPAIRABLE = "Repairable"
    FATAL = "Fatal"


_REQUIRED_PARAMS = {
    RuleKind.EMPTY_CHECK: (),
    RuleKind.LENGTH_CHECK: ("max_length",),
    RuleKind.FORBIDDEN_PATTERN: ("pattern",),
    RuleKind.LABEL_LEAK: ("names",),
    RuleKind.REPETITION: ("min_length", "min_count"),
}


@dataclass(frozen=True)
class ValidationRule:
    rule_id: str
    kind: RuleKind
    severity: Severity
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        for key in _REQUIRED_PARAMS[self.kind]:
            if key not in self.parameters:
                raise ValueError(f"rule {self.rule_id}: missing parameter {key!r}")


@dataclass(frozen=True)
class Violation:
    rule_id: str
    span: tuple[int, int]
    severity: Severity


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: tuple[Violation, ...]
    repaired_text: str | None = None


class OnExhaust(str, Enum):
    FALLBACK = "Fallback"
    ERROR = "Error"


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 2
    on_exhaust: OnExhaust = OnExhaust.FALLBACK
    fallback_text: str = DEFAULT_FALLBACK

    def __post_init__(self):
        if not 0 <= self.max_retries <= 5:
            raise ValueError("max_retries must be in 0..5")


def default_ruleset(roster_names: list[str] | None = None) -> list[ValidationRule]:
    return [
        ValidationRule("empty", RuleKind.EMPTY_CHECK, Severity.FATAL),
        ValidationRule(
            "length-cap",
            RuleKind.LENGTH_CHECK,
            Severity.REPAIRABLE,
            {"max_length": DEFAULT_MAX_LENGTH},
        ),
        ValidationRule(
            "ai-disclaimer",
            RuleKind.FORBIDDEN_PATTERN,
            Severity.FATAL,
            {"pattern": r"as an AI language model"},
        ),
        ValidationRule(
            "template-token",
            RuleKind.FORBIDDEN_PATTERN,
            Severity.FATAL,
            {"pattern": r"\{\{"},
        ),
        ValidationRule(
            "label-leak",
            RuleKind.LABEL_LEAK,
            Severity.REPAIRABLE,
            {"names": sorted(roster_names or [])},
        ),
        ValidationRule(
            "repetition",
            RuleKind.REPETITION,
            Severity.FATAL,
            {"min_length": DEFAULT_REPEAT_LEN, "min_count": DEFAULT_REPEAT_COUNT},
        ),
    ]


def load_ruleset(path: str | Path) -> list[ValidationRule]:
    """Read a JSON list of rule records {rule_id, kind, severity, parameters}."""
    records = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        ValidationRule(
            rule_id=r["rule_id"],
            kind=RuleKind(r["kind"]),
            severity=Severity(r["severity"]),
            parameters=r.get("parameters", {}),
        )
        for r in records
    ]


def _label_pattern(names: list[str]) -> re.Pattern | None:
    if not names:
        return None
    alternatives = "|".join(re.escape(n) for n in names if n)
    if not alternatives:
        return None
    return re.compile(rf"^\s*(?:{alternatives})\s*:\s*", re.IGNORECASE)


def _check(rule: ValidationRule, text: str) -> list[Violation]:
    if rule.kind is RuleKind.EMPTY_CHECK:
        if not text.strip():
            return [Violation(rule.rule_id, (0, 0), rule.severity)]
        return []
    if rule.kind is RuleKind.LENGTH_CHECK:
        limit = int(rule.parameters["max_length"])
        if len(text) > limit:
            return [Violation(rule.rule_id, (limit, len(text)), rule.severity)]
        return []
    if rule.kind is RuleKind.FORBIDDEN_PATTERN:
        pattern = re.compile(rule.parameters["pattern"], re.IGNORECASE)
        return [
            Violation(rule.rule_id, m.span(), rule.severity)
            for m in pattern.finditer(text)
        ]
    if rule.kind is RuleKind.LABEL_LEAK:
        pattern = _label_pattern(list(rule.parameters["names"]))
        if pattern is None:
            return []
        match = pattern.match(text)
        if match:
            return [Violation(rule.rule_id, match.span(), rule.severity)]
        return []
    if rule.kind is RuleKind.REPETITION:
        n = int(rule.parameters["min_length"])
        threshold = int(rule.parameters["min_count"])
        if len(text) < n:
            return []
        counts: dict[str, int] = {}
        first_pos: dict[str, int] = {}
        for i in range(len(text) - n + 1):
            gram = text[i : i + n]
            counts[gram] = counts.get(gram, 0) + 1
            if gram not in first_pos:
                first_pos[gram] = i
        worst = max(counts.items(), key=lambda kv: kv[1])
        if worst[1] >= threshold:
            start = first_pos[worst[0]]
            return [Violation(rule.rule_id, (start, start + n), rule.severity)]
        return []
    raise ValueError(f"unhandled rule kind: {rule.kind}")


def _collect(text: str, ruleset: list[ValidationRule]) -> list[Violation]:
    violations: list[Violation] = []
    for rule in ruleset:
        violations.extend(_check(rule, text))
    return violations


def _repair_once(text: str, violations: list[Violation], by_id: dict[str, ValidationRule]) -> str | None:
    """Apply one round of repairs; None if some violation has no mechanical fix."""
    current = text
    # Strip before truncating: a stripped label shortens the text.
    for violation in sorted(
        violations, key=lambda v: by_id[v.rule_id].kind is not RuleKind.LABEL_LEAK
    ):
        rule = by_id[violation.rule_id]
        if rule.kind is RuleKind.LABEL_LEAK:
            pattern = _label_pattern(list(rule.parameters["names"]))
            match = pattern.match(current) if pattern else None
            if match:
                current = current[match.end():]
        elif rule.kind is RuleKind.LENGTH_CHECK:
            limit = int(rule.parameters["max_length"])
            if len(current) <= limit:
                continue
            head = current[:limit]
            cut = max(head.rfind(ch) for ch in _SENTENCE_ENDS)
            if cut < 0:
                return None  # no sentence boundary to cut at
            current = head[: cut + 1].rstrip()
        else:
            return None
    return current


def validate(text: str, ruleset: list[ValidationRule]) -> ValidationReport:
    """Run every rule; attempt repair when all violations are Repairable.

    The reported violations always describe the original text. repaired_text
    is set only when the repaired result re-validates completely clean.
    """
    original = _collect(text, ruleset)
    if not original:
        return ValidationReport(passed=True, violations=())
    if any(v.severity is Severity.FATAL for v in original):
        return ValidationReport(passed=False, violations=tuple(original))
    by_id = {rule.rule_id: rule for rule in ruleset}
    current = text
    for _ in range(8):  # each strip/truncate shortens, so this terminates early
        found = _collect(current, ruleset)
        if not found:
            return ValidationReport(True, tuple(original), repaired_text=current)
        if any(v.severity is Severity.FATAL for v in found):
            break
        repaired = _repair_once(current, found, by_id)
        if repaired is None or repaired == current:
            break
        current = repaired
    return ValidationReport(passed=False, violations=tuple(original))


def generate_validated(
    context: DialogueContext,
    engine: Engine,
    ruleset: list[ValidationRule],
    policy: RetryPolicy,
    sampling: Sampling | None = None,
) -> str:
    """Complete, validate, retry on failure; at most max_retries + 1 calls."""
    request = build_prompt(context, sampling)
    for _ in range(policy.max_retries + 1):
        response = engine.complete(request)
        report = validate(response.text, ruleset)
        if report.passed:
            return report.repaired_text if report.repaired_text is not None else response.text
    if policy.on_exhaust is OnExhaust.FALLBACK:
        return policy.fallback_text
    raise ExhaustedRetries(
        f"no valid completion after {policy.max_retries + 1} attempts"
    )
