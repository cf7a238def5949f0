"""LLM-as-judge harness: per-criterion direct scoring and pairwise comparison.

Direct scoring asks the judge for a written analysis first and a 1..5 rating
last, one call per criterion. Pairwise comparison runs every pair twice with
the candidates' presentation order swapped; only when both passes name the
same winner does that winner stand, anything else is a tie. That double pass
is the position-bias guard, so the order swap and the label remap in
judge_pairwise are the load-bearing parts of this module.
"""

from __future__ import annotations

import hashlib
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from pathlib import Path

from .config import Config
from .engine import Engine, EngineRequest, EngineResponse, FinishReason, Sampling, make_engine
from .errors import (
    EmptyInput,
    EngineError,
    InvalidVerdict,
    JudgeTransportError,
    NoMarker,
    OutOfRange,
    ParseError,
    UnparseableJudgeOutput,
)

RATING_MARKER = "Rating:"
VERDICT_MARKER = "Verdict:"
PARSE_RETRIES = 2  # extra judge calls allowed when output won't parse


class Criterion(str, Enum):
    CORRECTNESS = "Correctness"
    CONSISTENCY = "Consistency"
    FAIRNESS = "Fairness"
    ENGAGEMENT = "Engagement"


# House wording of what each axis measures; kept short because the judge also
# sees the full sample.
CRITERION_DEFINITIONS: dict[Criterion, str] = {
    Criterion.CORRECTNESS: (
        "Does the reply get the point of what the user asked and answer it "
        "accurately, without misreading or ignoring the request?"
    ),
    Criterion.CONSISTENCY: (
        "Does the reply stay faithful to the agent's assigned persona and to "
        "what was already said in the conversation?"
    ),
    Criterion.FAIRNESS: (
        "Is the reply free of bias, discrimination, and ethically "
        "objectionable content?"
    ),
    Criterion.ENGAGEMENT: (
        "Is the reply easy to read, clear, concise, and emotionally "
        "satisfying to receive?"
    ),
}


class Verdict(str, Enum):
    WIN_A = "WinA"
    WIN_B = "WinB"
    TIE = "Tie"


@dataclass(frozen=True)
class EvalSample:
    role_configuration: str
    history: tuple[tuple[str, str], ...]
    latest_message: str
    responses: dict[str, str]

    def __post_init__(self):
        if not self.responses:
            raise ValueError("sample needs at least one labeled response")

    def to_dict(self) -> dict:
        return {
            "role_configuration": self.role_configuration,
            "history": [[s, t] for s, t in self.history],
            "latest_message": self.latest_message,
            "responses": self.responses,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalSample":
        return cls(
            role_configuration=data["role_configuration"],
            history=tuple((s, t) for s, t in data.get("history", [])),
            latest_message=data["latest_message"],
            responses=dict(data["responses"]),
        )


@dataclass(frozen=True)
class CriterionScore:
    criterion: Criterion
    score: int
    rationale: str

    def __post_init__(self):
        if self.score not in (1, 2, 3, 4, 5):
            raise ValueError(f"score out of range: {self.score}")
        if not self.rationale:
            raise ValueError("rationale is empty")


# -- judge prompts ------------------------------------------------------------


def _transcript(sample: EvalSample) -> str:
    lines = [f"{speaker}: {text}" for speaker, text in sample.history]
    return "\n".join(lines) if lines else "(no earlier messages)"


def direct_prompt(sample: EvalSample, response: str, criterion: Criterion) -> str:
    return (
        f"You are grading one group-chat reply on a single axis: {criterion.value}.\n"
        f"{CRITERION_DEFINITIONS[criterion]}\n"
        "\n"
        "Persona assigned to the replying agent:\n"
        f"{sample.role_configuration}\n"
        "\n"
        "Conversation so far:\n"
        f"{_transcript(sample)}\n"
        "\n"
        "Message being answered:\n"
        f"{sample.latest_message}\n"
        "\n"
        "Candidate reply:\n"
        f"{response}\n"
        "\n"
        "First write a short analysis of the reply's strengths and weaknesses "
        "on this axis. Then give a whole-number rating from 1 (poor) to 5 "
        f'(excellent). End your answer with a line of the form "{RATING_MARKER} <score>".'
    )


def pairwise_prompt(sample: EvalSample, first: str, second: str) -> str:
    return (
        "You are comparing two candidate replies to the same group-chat "
        "message and deciding which one is the better answer overall.\n"
        "\n"
        "Persona assigned to the replying agent:\n"
        f"{sample.role_configuration}\n"
        "\n"
        "Conversation so far:\n"
        f"{_transcript(sample)}\n"
        "\n"
        "Message being answered:\n"
        f"{sample.latest_message}\n"
        "\n"
        "Reply one:\n"
        f"{first}\n"
        "\n"
        "Reply two:\n"
        f"{second}\n"
        "\n"
        "First analyze both replies, then decide. End your answer with one "
        f'line: "{VERDICT_MARKER} first", "{VERDICT_MARKER} second", or '
        f'"{VERDICT_MARKER} tie".'
    )


JUDGE_SYSTEM_TEXT = (
    "You are a careful, impartial evaluator of chat replies. Follow the "
    "grading instructions exactly and keep your analysis brief."
)


def _judge_request(prompt: str) -> EngineRequest:
    request = EngineRequest(
        system_text=JUDGE_SYSTEM_TEXT,
        turns=(("evaluation request", prompt),),
        sampling=Sampling(temperature=0.0, max_tokens=512),
        request_id="",
    )
    digest = hashlib.sha256(request.canonical_bytes()).hexdigest()
    return EngineRequest(request.system_text, request.turns, request.sampling, digest)


# -- parsing -------------------------------------------------------------------


def parse_judge_output(text: str) -> tuple[str, int]:
    """Split (rationale, score) on the final "Rating:" marker."""
    position = text.rfind(RATING_MARKER)
    if position < 0:
        raise NoMarker(f"no {RATING_MARKER!r} marker in judge output")
    rationale = text[:position].strip()
    tail = text[position + len(RATING_MARKER):]
    match = re.search(r"-?\d+", tail)
    if match is None:
        raise NoMarker(f"no integer after {RATING_MARKER!r}")
    score = int(match.group())
    if score not in (1, 2, 3, 4, 5):
        raise OutOfRange(f"score {score} outside 1..5")
    return rationale, score


def parse_pair_verdict(text: str) -> str:
    """Return "first", "second", or "tie" from the final "Verdict:" marker."""
    position = text.rfind(VERDICT_MARKER)
    if position < 0:
        raise NoMarker(f"no {VERDICT_MARKER!r} marker in judge output")
    tail = text[position + len(VERDICT_MARKER):]
    match = re.search(r"[A-Za-z]+", tail)
    if match is None:
        raise InvalidVerdict(f"nothing after {VERDICT_MARKER!r}")
    word = match.group().lower()
    if word not in ("first", "second", "tie"):
        raise InvalidVerdict(f"unexpected verdict word: {word!r}")
    return word


# -- judging --------------------------------------------------------------------


def _ask(judge: Engine, prompt: str, parse):
    """One judged question with bounded parse retries."""
    request = _judge_request(prompt)
    last_error: ParseError | None = None
    for _ in range(PARSE_RETRIES + 1):
        try:
            response = judge.complete(request)
        except EngineError as exc:
            raise JudgeTransportError(str(exc)) from exc
        try:
            return parse(response.text)
        except ParseError as exc:
            last_error = exc
    raise UnparseableJudgeOutput(str(last_error))


def _labeled_response(sample: EvalSample, label: str) -> str:
    try:
        return sample.responses[label]
    except KeyError:
        raise ValueError(
            f"no response labeled {label!r}; sample has {sorted(sample.responses)}"
        ) from None


def judge_direct(sample: EvalSample, system_label: str, judge: Engine) -> list[CriterionScore]:
    """Score one labeled response on all four criteria, one call each."""
    response = _labeled_response(sample, system_label)
    scores: list[CriterionScore] = []
    for criterion in Criterion:
        rationale, score = _ask(
            judge, direct_prompt(sample, response, criterion), parse_judge_output
        )
        scores.append(
            CriterionScore(criterion, score, rationale or "(no rationale given)")
        )
    return scores


def resolve_pair(forward: Verdict, reverse: Verdict) -> Verdict:
    """Strict agreement: both passes must name the same winner."""
    if forward == reverse and forward is not Verdict.TIE:
        return forward
    return Verdict.TIE


def judge_pairwise(
    sample: EvalSample, label_a: str, label_b: str, judge: Engine
) -> Verdict:
    """Two passes with swapped presentation order, then strict agreement.

    In the reversed pass candidate B is shown first, so the judge's "first"
    means B there; the remap below undoes the swap before resolving.
    """
    text_a = _labeled_response(sample, label_a)
    text_b = _labeled_response(sample, label_b)

    raw_forward = _ask(judge, pairwise_prompt(sample, text_a, text_b), parse_pair_verdict)
    raw_reverse = _ask(judge, pairwise_prompt(sample, text_b, text_a), parse_pair_verdict)

    forward = {"first": Verdict.WIN_A, "second": Verdict.WIN_B, "tie": Verdict.TIE}[raw_forward]
    reverse = {"first": Verdict.WIN_B, "second": Verdict.WIN_A, "tie": Verdict.TIE}[raw_reverse]
    return resolve_pair(forward, reverse)


# -- aggregation ------------------------------------------------------------------


def round_half_up(value, digits: int = 2) -> Decimal:
    if not isinstance(value, Decimal):
        value = Decimal(str(value))
    return value.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class DirectAggregate:
    per_criterion: dict[Criterion, Decimal]
    overall: Decimal
    sample_count: int

    def to_dict(self) -> dict:
        return {
            "per_criterion": {c.value: float(v) for c, v in self.per_criterion.items()},
            "overall": float(self.overall),
            "sample_count": self.sample_count,
        }


def aggregate_direct(score_sets: list[dict[Criterion, int]]) -> DirectAggregate:
    """Per-criterion means plus their average, everything rounded half-up to 2dp."""
    if not score_sets:
        raise EmptyInput("no score sets to aggregate")
    per_criterion: dict[Criterion, Decimal] = {}
    for criterion in Criterion:
        values = [scores[criterion] for scores in score_sets]
        if any(v not in (1, 2, 3, 4, 5) for v in values):
            raise ValueError(f"{criterion.value}: score outside 1..5")
        per_criterion[criterion] = round_half_up(
            Decimal(sum(values)) / Decimal(len(values))
        )
    overall = round_half_up(
        sum(per_criterion.values()) / Decimal(len(per_criterion))
    )
    return DirectAggregate(per_criterion, overall, len(score_sets))


@dataclass(frozen=True)
class PairwiseAggregate:
    win_pct: Decimal
    tie_pct: Decimal
    lose_pct: Decimal
    counts: tuple[int, int, int]

    def to_dict(self) -> dict:
        return {
            "win_pct": float(self.win_pct),
            "tie_pct": float(self.tie_pct),
            "lose_pct": float(self.lose_pct),
            "counts": {
                "win": self.counts[0],
                "tie": self.counts[1],
                "lose": self.counts[2],
            },
        }


def aggregate_pairwise(verdicts: list[Verdict]) -> PairwiseAggregate:
    """Win/tie/lose percentages for candidate A, rounded half-up to 2dp."""
    if not verdicts:
        raise EmptyInput("no verdicts to aggregate")
    total = Decimal(len(verdicts))
    wins = sum(1 for v in verdicts if v is Verdict.WIN_A)
    ties = sum(1 for v in verdicts if v is Verdict.TIE)
    loses = sum(1 for v in verdicts if v is Verdict.WIN_B)
    return PairwiseAggregate(
        win_pct=round_half_up(Decimal(wins) * 100 / total),
        tie_pct=round_half_up(Decimal(ties) * 100 / total),
        lose_pct=round_half_up(Decimal(loses) * 100 / total),
        counts=(wins, ties, loses),
    )


# -- batch runs -----------------------------------------------------------------------


def run_direct(
    samples: list[EvalSample],
    system_label: str,
    judge: Engine,
    parallelism: int = 4,
) -> dict:
    if not samples:
        raise EmptyInput("no samples")
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        all_scores = list(
            pool.map(lambda s: judge_direct(s, system_label, judge), samples)
        )
    score_sets = [{cs.criterion: cs.score for cs in scores} for scores in all_scores]
    aggregate = aggregate_direct(score_sets)
    report = aggregate.to_dict()
    report["label"] = system_label
    report["per_sample"] = [
        {cs.criterion.value: cs.score for cs in scores} for scores in all_scores
    ]
    return report


def run_pairwise(
    samples: list[EvalSample],
    label_a: str,
    label_b: str,
    judge: Engine,
    parallelism: int = 4,
) -> dict:
    if not samples:
        raise EmptyInput("no samples")
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        verdicts = list(
            pool.map(lambda s: judge_pairwise(s, label_a, label_b, judge), samples)
        )
    aggregate = aggregate_pairwise(verdicts)
    report = aggregate.to_dict()
    report["label_a"] = label_a
    report["label_b"] = label_b
    report["per_sample"] = [v.value for v in verdicts]
    return report


# -- corpus IO -------------------------------------------------------------------------


def load_samples(path: str | Path) -> list[EvalSample]:
    samples = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            samples.append(EvalSample.from_dict(json.loads(line)))
    return samples


def write_samples(path: str | Path, samples: list[EvalSample]) -> None:
    lines = [json.dumps(s.to_dict(), ensure_ascii=False) for s in samples]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- offline judge -----------------------------------------------------------------


class MockJudge:
    """Deterministic judge double for offline runs.

    Emits a parseable rating or verdict derived from a digest of the prompt
    and the seed; same prompt and seed always judge the same way.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed

    def complete(self, request: EngineRequest) -> EngineResponse:
        digest = hashlib.sha256(
            request.canonical_bytes() + f"|judge-seed={self.seed}".encode()
        ).digest()
        prompt = request.turns[-1][1] if request.turns else ""
        if VERDICT_MARKER in prompt:
            word = ("first", "second", "tie")[digest[0] % 3]
            text = f"Offline deterministic comparison. {VERDICT_MARKER} {word}"
        else:
            score = 1 + digest[0] % 5
            text = f"Offline deterministic assessment. {RATING_MARKER} {score}"
        return EngineResponse(text=text, finish_reason=FinishReason.STOP)


def make_judge(config: Config) -> Engine:
    """Judge engine from a config; the mock backend maps to MockJudge."""
    if config.get("engine.backend") == "mock":
        return MockJudge(seed=config.get_int("engine.mock_seed"))
    return make_engine(config)
