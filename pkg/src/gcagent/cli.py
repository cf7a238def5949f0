"""Command line entry points: serve, eval, analytics."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analytics import (
    ab_report,
    agents_from_events,
    retention,
    role_distribution,
)
from .config import Config
from .corpus import build_corpus
from .errors import GcagentError
from .evaluation import load_samples, make_judge, run_direct, run_pairwise, write_samples
from .events import load_log_dir


def _load_config(path: str | None) -> Config:
    return Config.load(path) if path else Config()


def _write_or_print(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {out}")
    else:
        print(text)


def _table(rows: list[list[str]], header: list[str]) -> str:
    widths = [
        max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))
    ]
    def fmt(row):
        return "  ".join(str(cell).ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)


def _cmd_serve(args) -> int:
    from .server import serve  # deferred: uvicorn import is slow

    serve(_load_config(args.config))
    return 0


def _cmd_eval_direct(args) -> int:
    judge_config = _load_config(args.judge)
    samples = load_samples(args.input)
    report = run_direct(
        samples,
        args.label,
        make_judge(judge_config),
        parallelism=judge_config.get_int("eval.parallelism"),
    )
    _write_or_print(report, args.out)
    return 0


def _cmd_eval_pairwise(args) -> int:
    judge_config = _load_config(args.judge)
    samples = load_samples(args.input)
    report = run_pairwise(
        samples,
        args.label_a,
        args.label_b,
        make_judge(judge_config),
        parallelism=judge_config.get_int("eval.parallelism"),
    )
    _write_or_print(report, args.out)
    return 0


def _cmd_eval_synth(args) -> int:
    samples = build_corpus(args.n, seed=args.seed)
    write_samples(args.out, samples)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def _cmd_analytics_ab(args) -> int:
    config = _load_config(args.config)
    control = load_log_dir(args.control)
    treatment = load_log_dir(args.treatment)
    reports = ab_report(
        control,
        treatment,
        min_messages=config.get_int("analytics.activity_min_messages"),
        include_agent_replies=config.get_bool("analytics.count_agent_replies"),
    )
    payload = {"metrics": [r.to_dict() for r in reports]}
    if args.format == "table":
        rows = [
            [
                r.metric.value,
                f"{r.control_value:g}",
                f"{r.treatment_value:g}",
                f"{'+' if r.improvement_pct >= 0 else ''}{r.improvement_pct}",
            ]
            for r in reports
        ]
        print(_table(rows, ["Metric", "Control", "Treatment", "Improvement (%)"]))
        if args.out:
            _write_or_print(payload, args.out)
    else:
        _write_or_print(payload, args.out)
    return 0


def _cmd_analytics_retention(args) -> int:
    events = load_log_dir(args.log)
    horizons = tuple(int(h) for h in args.horizons.split(","))
    reports = retention(events, horizons)
    payload = {"retention": [r.to_dict() for r in reports]}
    if args.format == "table":
        rows = [
            [str(r.horizon_days), str(r.cohort_size), str(r.retained), f"{r.rate_pct}"]
            for r in reports
        ]
        print(_table(rows, ["Horizon (days)", "Cohort", "Retained", "Rate (%)"]))
        if args.out:
            _write_or_print(payload, args.out)
    else:
        _write_or_print(payload, args.out)
    return 0


def _cmd_analytics_roles(args) -> int:
    events = load_log_dir(args.log)
    agents = agents_from_events(events)
    dist = role_distribution(agents, events, top_k=args.top)
    payload = dist.to_dict()
    if args.format == "table":
        rows = [
            [str(i + 1), name, category, str(count)]
            for i, (name, category, count) in enumerate(dist.entries)
        ]
        print(_table(rows, ["#", "Name", "Category", "Interactions"]))
        shares = ", ".join(f"{c}: {v}%" for c, v in dist.category_share.items())
        print(f"\nCategory share (all agents): {shares}")
        if args.out:
            _write_or_print(payload, args.out)
    else:
        _write_or_print(payload, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcagent", description="Group-chat agent service and analysis tools"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve_p = sub.add_parser("serve", help="run the API server")
    serve_p.add_argument("--config", help="path to a key=value config file")
    serve_p.set_defaults(func=_cmd_serve)

    eval_p = sub.add_parser("eval", help="judge-based response evaluation")
    eval_sub = eval_p.add_subparsers(dest="eval_command", required=True)

    direct_p = eval_sub.add_parser("direct", help="score one labeled response set")
    direct_p.add_argument("--input", required=True, help="JSONL sample corpus")
    direct_p.add_argument("--label", required=True, help="response label to score")
    direct_p.add_argument("--judge", help="judge engine config file")
    direct_p.add_argument("--out", help="write the JSON report here")
    direct_p.set_defaults(func=_cmd_eval_direct)

    pair_p = eval_sub.add_parser("pairwise", help="compare two labeled response sets")
    pair_p.add_argument("--input", required=True)
    pair_p.add_argument("--label-a", required=True, dest="label_a")
    pair_p.add_argument("--label-b", required=True, dest="label_b")
    pair_p.add_argument("--judge", help="judge engine config file")
    pair_p.add_argument("--out", help="write the JSON report here")
    pair_p.set_defaults(func=_cmd_eval_pairwise)

    synth_p = eval_sub.add_parser("synth", help="generate a synthetic sample corpus")
    synth_p.add_argument("--out", required=True)
    synth_p.add_argument("--n", type=int, default=50)
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.set_defaults(func=_cmd_eval_synth)

    analytics_p = sub.add_parser("analytics", help="event-log metrics")
    analytics_sub = analytics_p.add_subparsers(dest="analytics_command", required=True)

    ab_p = analytics_sub.add_parser("ab", help="control vs treatment improvements")
    ab_p.add_argument("--control", required=True, help="control log directory")
    ab_p.add_argument("--treatment", required=True, help="treatment log directory")
    ab_p.add_argument("--config", help="config file for the analytics.* keys")
    ab_p.add_argument("--out", help="write the JSON report here")
    ab_p.add_argument("--format", choices=["json", "table"], default="json")
    ab_p.set_defaults(func=_cmd_analytics_ab)

    retention_p = analytics_sub.add_parser("retention", help="cohort retention rates")
    retention_p.add_argument("--log", required=True, help="log directory")
    retention_p.add_argument("--horizons", default="1,3,7")
    retention_p.add_argument("--out")
    retention_p.add_argument("--format", choices=["json", "table"], default="json")
    retention_p.set_defaults(func=_cmd_analytics_retention)

    roles_p = analytics_sub.add_parser("roles", help="agent popularity ranking")
    roles_p.add_argument("--log", required=True, help="log directory")
    roles_p.add_argument("--top", type=int, default=20)
    roles_p.add_argument("--out")
    roles_p.add_argument("--format", choices=["json", "table"], default="json")
    roles_p.set_defaults(func=_cmd_analytics_roles)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GcagentError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
