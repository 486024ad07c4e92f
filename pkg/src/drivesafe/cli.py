"""Command line front end.

Subcommands: run a scenario manifest, mine rules from a transaction log,
plan a repair sequence from a persisted model, print the evaluation
statistics for questionnaire files, and synthesize a session bundle.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import evalstats, mining, recommend, scenario
from .domain import AffectiveState, load_catalog
from .errors import DriveSafeError


def _cmd_run(args) -> int:
    from .cpsnet import run_scenario

    result = run_scenario(args.manifest, mode=args.mode, seed=args.seed, out_dir=args.out)
    notifications = result.count_events("SafetyNotification")
    print(f"periods: {len(result.transactions)}")
    print(f"rules: {len(result.rules)}")
    print(f"safety notifications: {notifications}")
    print(f"events: {len(result.events)}")
    if args.out:
        print(f"artifacts written to {args.out}")
    return 0


def _cmd_mine(args) -> int:
    db = mining.load_transactions(args.transactions)
    frequent = mining.apriori_frequent(db, args.min_support)
    rules = mining.apriori_rules(frequent, args.min_confidence)
    if args.out:
        mining.save_rules(args.out, rules)
        print(f"{len(rules)} rules written to {args.out}")
    else:
        for rule in rules:
            print(mining.rule_to_json(rule))
    return 0


def _parse_state(text: str) -> AffectiveState:
    try:
        valence, arousal = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise DriveSafeError(f"state must look like 'valence,arousal', got {text!r}") from exc
    return AffectiveState(valence, arousal)


def _parse_target(text: str):
    if not text.startswith("valence>="):
        raise DriveSafeError(f"target must look like 'valence>=6', got {text!r}")
    return recommend.min_valence_target(int(text[len("valence>="):]))


def _cmd_plan(args) -> int:
    catalog = load_catalog(args.catalog) if args.catalog else load_catalog()
    model = recommend.TransitionModel.load_tsv(
        args.model,
        alpha=args.alpha,
        space=recommend.StateSpace.from_grid(args.state_grid),
        contents=tuple(catalog),
    )
    start = _parse_state(args.start)
    plan = recommend.plan_repair(
        model, start, _parse_target(args.target), args.horizon, sorted(catalog)
    )
    if plan is None:
        print(json.dumps({"status": "no_plan", "start": [start.valence, start.arousal]}))
        return 1
    out = {"status": "ok" if plan.contents else "already_target",
           "start": [start.valence, start.arousal]}
    out.update(plan.to_dict())
    print(json.dumps(out))
    return 0


def _cmd_stats(args) -> int:
    groups = evalstats.load_responses(args.responses)
    print("== usability scores ==")
    print(evalstats.format_descriptives(groups))
    print()
    print("== one-way ANOVA ==")
    print(evalstats.format_anova(evalstats.anova_oneway(groups)))
    if args.binary:
        x, n = evalstats.load_binary(args.binary)
        print()
        print(f"== confidence intervals ({x}/{n}, level {args.level}) ==")
        print(evalstats.format_cis(evalstats.all_cis(x, n, args.level)))
    return 0


def _cmd_synth(args) -> int:
    script = scenario.load_script(args.script)
    manifest = scenario.emit_session(script, args.out)
    print(f"session bundle written, manifest at {manifest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drivesafe",
        description="Driver-context mining and mood-repair pipeline simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario manifest")
    p_run.add_argument("manifest", type=Path)
    p_run.add_argument("--mode", choices=["simulated", "realtime"], default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", type=Path, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_mine = sub.add_parser("mine", help="mine rules from a transactions.jsonl")
    p_mine.add_argument("transactions", type=Path)
    p_mine.add_argument("--min-support", type=float, default=0.1)
    p_mine.add_argument("--min-confidence", type=float, default=0.6)
    p_mine.add_argument("--out", type=Path, default=None)
    p_mine.set_defaults(func=_cmd_mine)

    p_plan = sub.add_parser("plan", help="plan a repair sequence from a model.tsv")
    p_plan.add_argument("model", type=Path)
    p_plan.add_argument("start", help="current state as 'valence,arousal'")
    p_plan.add_argument("target", help="target predicate, e.g. 'valence>=6'")
    p_plan.add_argument("--horizon", type=int, default=5)
    p_plan.add_argument("--alpha", type=float, default=1.0)
    p_plan.add_argument("--state-grid", type=int, choices=[3, 9], default=9)
    p_plan.add_argument("--catalog", type=Path, default=None)
    p_plan.set_defaults(func=_cmd_plan)

    p_stats = sub.add_parser("stats", help="describe questionnaire responses")
    p_stats.add_argument("responses", type=Path)
    p_stats.add_argument("--binary", type=Path, default=None)
    p_stats.add_argument("--level", type=float, default=0.95)
    p_stats.set_defaults(func=_cmd_stats)

    p_synth = sub.add_parser("synth", help="emit a replay bundle from a session script")
    p_synth.add_argument("script", type=Path)
    p_synth.add_argument("out", type=Path)
    p_synth.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DriveSafeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
