"""Scenario manifests and the end-to-end run loop.

A manifest is a JSON document naming the replay files, the classifier
profile, the mood trace, thresholds and link parameters.  Runs are
deterministic in simulated mode for a fixed seed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .. import mining
from ..domain import EnvironmentThresholds, load_catalog
from ..errors import ScenarioError
from ..inference import (
    ClassifierProfile,
    MoodSourceKind,
    ReplayMoodSource,
    StubMoodSource,
    StubRules,
    load_mood_trace,
)
from ..recommend import TransitionModel
from ..sigproc import DEFAULT_RATES
from .fabric import Fabric, LinkConfig, events_to_jsonl
from .nodes import (
    ENV_CHANNELS,
    PHYS_CHANNELS,
    ActivityTimeline,
    BANSink,
    CameraNode,
    CloudNode,
    EdgeNode,
    EnvGateway,
    MiningConfig,
    OnVehicleNode,
    PlannerConfig,
)

NODE_NAMES = ("camera", "bansink", "envgw", "edge", "vehicle", "cloud")

DEFAULT_LINKS: dict[str, dict] = {
    "camera->edge": {"latency_ms": 5},
    "bansink->edge": {"latency_ms": 10},
    "envgw->edge": {"latency_ms": 10},
    "edge->vehicle": {"latency_ms": 5},
    "vehicle->edge": {"latency_ms": 5},
    "vehicle->vehicle": {"latency_ms": 0},  # dashboard loopback
    "vehicle->cloud": {"latency_ms": 20},
    "cloud->vehicle": {"latency_ms": 20},
    "edge->cloud": {"latency_ms": 20},
}

MIN_PHYS_SAMPLES = 64  # enough for the filter warm-up on every channel


@dataclass
class ScenarioResult:
    manifest: dict
    events: list[dict]
    transactions: list[mining.ContextTransaction]
    rules: list[mining.AssociationRule]
    plans: list[dict]
    model: TransitionModel
    model_snapshots: dict[str, TransitionModel]
    notes: list[dict] = field(default_factory=list)

    def count_events(self, msg_type: str, event: str = "deliver") -> int:
        return sum(
            1 for e in self.events
            if e.get("event") == event and e.get("msg_type") == msg_type
        )

    def events_jsonl(self) -> str:
        return events_to_jsonl(self.events)


def load_manifest(path: str | Path) -> dict:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    manifest["_dir"] = str(path.parent)
    return manifest


def _resolve(manifest: dict, name: str) -> Path:
    return Path(manifest.get("_dir", ".")) / manifest[name]


def _read_channel_csv(path: Path) -> tuple[list[int], list[float]]:
    ts, values = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t_ms", "value"]:
            raise ScenarioError(f"{path}: expected header t_ms,value, got {header}")
        for row in reader:
            ts.append(int(row[0]))
            values.append(float(row[1]))
    if not ts:
        raise ScenarioError(f"{path}: no samples")
    return ts, values


def _group_by_period(ts: list[int], values: list[float], period_ms: int,
                     n_periods: int) -> dict[int, list[float]]:
    grouped: dict[int, list[float]] = {m: [] for m in range(1, n_periods + 1)}
    for t, v in zip(ts, values):
        m = (t + period_ms - 1) // period_ms if t > 0 else 1
        if 1 <= m <= n_periods:
            grouped[m].append(v)
    return grouped


def _read_truth(path: Path, duration_ms: int) -> ActivityTimeline:
    segments = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            segments.append((int(row["start_ms"]), int(row["end_ms"]), int(row["class"])))
    return ActivityTimeline(tuple(segments), duration_ms)


def _read_plays(path: Path) -> dict[int, int]:
    plays = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            plays[int(row["period"])] = int(row["content"])
    return plays


def run_scenario(
    manifest: dict | str | Path,
    mode: str | None = None,
    seed: int | None = None,
    out_dir: str | Path | None = None,
) -> ScenarioResult:
    """Execute a scenario manifest and return the collected artifacts."""
    if not isinstance(manifest, dict):
        manifest = load_manifest(manifest)
    mode = mode or manifest.get("mode", "simulated")
    seed = seed if seed is not None else int(manifest.get("seed", 0))

    duration_ms = int(manifest["duration_ms"])
    tick_ms = int(manifest.get("tick_ms", 300))
    period_ms = int(manifest.get("period_ms", 120_000))
    points_per_period = int(manifest.get("points_per_period", 8064))
    n_periods = duration_ms // period_ms
    if duration_ms <= 0 or tick_ms <= 0 or period_ms <= 0:
        raise ScenarioError("duration, tick and period must be positive")
    if n_periods < 1:
        raise ScenarioError("duration shorter than one mood period")

    replay = manifest.get("replay", {})
    rates = {
        ch.value: float(manifest.get("rates", {}).get(ch.value, DEFAULT_RATES[ch]))
        for ch in PHYS_CHANNELS + ENV_CHANNELS
    }
    phys_by_period: dict[int, dict[str, list[float]]] = {
        m: {} for m in range(1, n_periods + 1)
    }
    env_by_period: dict[int, dict[str, list[float]]] = {
        m: {} for m in range(1, n_periods + 1)
    }
    env_window = int(manifest.get("env_window", 30))
    for ch in PHYS_CHANNELS:
        key = ch.value.lower()
        if key not in replay:
            raise ScenarioError(f"manifest replay section lacks {key!r}")
        ts, values = _read_channel_csv(Path(manifest.get("_dir", ".")) / replay[key])
        grouped = _group_by_period(ts, values, period_ms, n_periods)
        for m in range(1, n_periods + 1):
            if len(grouped[m]) < MIN_PHYS_SAMPLES:
                raise ScenarioError(
                    f"{ch.value} replay has {len(grouped[m])} samples for period {m}, "
                    f"needs >= {MIN_PHYS_SAMPLES}"
                )
            phys_by_period[m][ch.value] = grouped[m]
    for ch in ENV_CHANNELS:
        key = ch.value.lower()
        if key not in replay:
            raise ScenarioError(f"manifest replay section lacks {key!r}")
        ts, values = _read_channel_csv(Path(manifest.get("_dir", ".")) / replay[key])
        grouped = _group_by_period(ts, values, period_ms, n_periods)
        for m in range(1, n_periods + 1):
            if len(grouped[m]) < env_window:
                raise ScenarioError(
                    f"{ch.value} replay has {len(grouped[m])} samples for period {m}, "
                    f"needs >= {env_window}"
                )
            env_by_period[m][ch.value] = grouped[m]

    timeline = _read_truth(_resolve(manifest, "activity_truth"), duration_ms)

    if "profile" in manifest:
        profile = ClassifierProfile.load_tsv(_resolve(manifest, "profile"), seed=seed)
    else:
        profile = ClassifierProfile.identity(seed=seed)

    mood_mode = MoodSourceKind(manifest.get("mood_mode", "Replay"))
    if mood_mode is MoodSourceKind.REPLAY:
        trace = load_mood_trace(_resolve(manifest, "mood_trace"))
        missing = [m for m in range(1, n_periods + 1) if m not in trace]
        if missing:
            raise ScenarioError(f"mood trace lacks periods {missing}")
        mood_source = ReplayMoodSource(trace)
    else:
        stub = manifest.get("stub_rules", {})
        mood_source = StubMoodSource(StubRules(**stub)) if stub else StubMoodSource()

    catalog = (
        load_catalog(_resolve(manifest, "catalog")) if "catalog" in manifest else load_catalog()
    )
    plays = _read_plays(_resolve(manifest, "content_plays")) if "content_plays" in manifest else {}
    unknown = sorted(set(plays.values()) - set(catalog))
    if unknown:
        raise ScenarioError(f"scripted plays reference unknown contents {unknown}")

    thresholds = EnvironmentThresholds(
        **{k: tuple(v) for k, v in manifest.get("thresholds", {}).items()}
    )
    mining_config = MiningConfig(**manifest.get("mining", {}))
    planner = PlannerConfig(**manifest.get("planner", {}))

    fabric = Fabric(
        driver_id=manifest.get("driver_id", "driver-1"),
        mode=mode,
        realtime_scale=float(manifest.get("realtime_scale", 1.0)),
    )
    camera = CameraNode("camera", "edge", timeline, tick_ms, duration_ms)
    phys_rates = {ch.value: rates[ch.value] for ch in PHYS_CHANNELS}
    bansink = BANSink("bansink", "edge", phys_by_period, phys_rates, period_ms,
                      n_periods, points_per_period)
    envgw = EnvGateway("envgw", "edge", env_by_period, period_ms, n_periods, env_window)
    edge = EdgeNode(
        "edge", "vehicle", "cloud",
        profile=profile, mood_source=mood_source, thresholds=thresholds,
        mining_config=mining_config, period_ms=period_ms, scripted_plays=plays,
    )
    vehicle = OnVehicleNode("vehicle", "edge", "cloud", planner=planner, scripted_plays=plays)
    cloud = CloudNode("cloud", catalog)
    for node in (camera, bansink, envgw, edge, vehicle, cloud):
        fabric.add_node(node)

    link_specs = dict(DEFAULT_LINKS)
    for name, spec in manifest.get("links", {}).items():
        link_specs[name] = spec
    for name, spec in link_specs.items():
        src, dst = name.split("->")
        if src not in NODE_NAMES or dst not in NODE_NAMES:
            raise ScenarioError(f"link {name!r} names unknown nodes")
        fabric.add_link(src, dst, LinkConfig(
            latency_ms=int(spec.get("latency_ms", 0)),
            capacity=spec.get("capacity"),
        ))

    for node_name, t_ms in manifest.get("fail_at", {}).items():
        if node_name not in NODE_NAMES:
            raise ScenarioError(f"fail_at names unknown node {node_name!r}")
        fabric.schedule(int(t_ms), _make_failer(fabric, node_name))

    fabric.run(until_ms=None)

    result = ScenarioResult(
        manifest=manifest,
        events=fabric.events,
        transactions=list(edge.transactions),
        rules=list(edge.rules),
        plans=list(vehicle.plans),
        model=vehicle.model,
        model_snapshots=dict(vehicle.snapshots),
        notes=list(edge.notes),
    )
    if out_dir is not None:
        _write_outputs(result, Path(out_dir))
    return result


def _make_failer(fabric: Fabric, node_name: str):
    return lambda: fabric.fail_node(node_name)


def _write_outputs(result: ScenarioResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "events.jsonl").write_text(result.events_jsonl(), encoding="utf-8")
    mining.save_transactions(out_dir / "transactions.jsonl", result.transactions)
    mining.save_rules(out_dir / "rules.jsonl", result.rules)
    result.model.save_tsv(out_dir / "model.tsv")
    with open(out_dir / "plans.jsonl", "w", encoding="utf-8") as fh:
        for plan in result.plans:
            fh.write(json.dumps(plan, sort_keys=True) + "\n")
    summary = {
        "notifications": result.count_events("SafetyNotification"),
        "periods": len(result.transactions),
        "rules": len(result.rules),
        "events": len(result.events),
    }
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
