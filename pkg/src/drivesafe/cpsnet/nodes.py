"""Node actors for the four-layer fabric.

Sensor-layer nodes replay scripted data, the edge node classifies, fuses
and mines, the on-vehicle node notifies and plans, and the cloud node
serves the content catalog.  Nodes communicate only through envelopes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import mining, recommend
from ..domain import (
    ACTIVITY_TABLE,
    AffectiveState,
    ContentId,
    EnvironmentThresholds,
    mood_lookup,
)
from ..errors import ScenarioError
from ..inference import ActivityObservation, ClassifierProfile, classify_activity
from ..sigproc import (
    Channel,
    SensorFrame,
    env_snapshot,
    preprocess_physiological,
    window_features,
)
from .codec import Envelope, MsgType
from .fabric import Node

PHYS_CHANNELS = (Channel.EMG, Channel.ECG, Channel.EDA, Channel.EEG)
ENV_CHANNELS = (Channel.LIGHT, Channel.TEMPERATURE, Channel.HUMIDITY)


@dataclass(frozen=True)
class ActivityTimeline:
    """Ground-truth activity segments covering [0, duration_ms)."""

    segments: tuple[tuple[int, int, int], ...]  # (start_ms, end_ms, class_id)
    duration_ms: int

    def __post_init__(self):
        expected = 0
        for start, end, cls in self.segments:
            if start != expected or end <= start:
                raise ScenarioError(f"segments must tile [0, duration), bad ({start}, {end})")
            if cls not in ACTIVITY_TABLE:
                raise ScenarioError(f"unknown activity class {cls}")
            expected = end
        if expected != self.duration_ms:
            raise ScenarioError(f"segments end at {expected}, expected {self.duration_ms}")

    def at(self, t_ms: int) -> int:
        t = min(max(t_ms, 0), self.duration_ms - 1)
        for start, end, cls in self.segments:
            if start <= t < end:
                return cls
        raise ScenarioError(f"no segment covers t={t_ms}")


def period_of(t_ms: int, period_ms: int) -> int:
    return (t_ms + period_ms - 1) // period_ms


class CameraNode(Node):
    kind = "CameraNode"

    def __init__(self, name: str, edge: str, timeline: ActivityTimeline,
                 tick_ms: int, duration_ms: int):
        super().__init__(name)
        self.edge = edge
        self.timeline = timeline
        self.tick_ms = tick_ms
        self.duration_ms = duration_ms

    def start(self):
        t = self.tick_ms
        while t <= self.duration_ms:
            self.at(t, self._make_tick(t))
            t += self.tick_ms

    def _make_tick(self, t):
        def _tick():
            # a tick reports the activity over the interval ending at t, so
            # boundary ticks stay with the period they close
            self.send(self.edge, MsgType.SENSOR_BATCH, {
                "kind": "camera", "t_ms": t, "true_class": self.timeline.at(t - 1),
            })
        return _tick

    def handle(self, env: Envelope):
        pass


class BANSink(Node):
    """Physiological aggregator: one batch of trailing samples per period."""

    kind = "BANSink"

    def __init__(self, name: str, edge: str, by_period: dict[int, dict[str, list[float]]],
                 rates: dict[str, float], period_ms: int, n_periods: int,
                 points_per_period: int):
        super().__init__(name)
        self.edge = edge
        self.by_period = by_period
        self.rates = rates
        self.period_ms = period_ms
        self.n_periods = n_periods
        self.points_per_period = points_per_period

    def start(self):
        for m in range(1, self.n_periods + 1):
            self.at(m * self.period_ms, self._make_batch(m))

    def _make_batch(self, m):
        def _batch():
            channels = {
                name: samples[-self.points_per_period:]
                for name, samples in self.by_period[m].items()
            }
            self.send(self.edge, MsgType.SENSOR_BATCH, {
                "kind": "physiological", "period": m,
                "rates": self.rates, "channels": channels,
            })
        return _batch

    def handle(self, env: Envelope):
        pass


class EnvGateway(Node):
    kind = "EnvGateway"

    def __init__(self, name: str, edge: str, by_period: dict[int, dict[str, list[float]]],
                 period_ms: int, n_periods: int, window: int = 30):
        super().__init__(name)
        self.edge = edge
        self.by_period = by_period
        self.period_ms = period_ms
        self.n_periods = n_periods
        self.window = window

    def start(self):
        for m in range(1, self.n_periods + 1):
            self.at(m * self.period_ms, self._make_batch(m))

    def _make_batch(self, m):
        def _batch():
            payload = {"kind": "environment", "period": m, "window": self.window}
            for name, samples in self.by_period[m].items():
                payload[name] = samples[-self.window:]
            self.send(self.edge, MsgType.SENSOR_BATCH, payload)
        return _batch

    def handle(self, env: Envelope):
        pass


@dataclass
class MiningConfig:
    every_periods: int = 5
    min_support: float = 0.1
    min_confidence: float = 0.6


class EdgeNode(Node):
    """Classification, mood estimation, context fusion and rule mining."""

    kind = "Edge"

    def __init__(self, name: str, vehicle: str, cloud: str, *,
                 profile: ClassifierProfile, mood_source, thresholds: EnvironmentThresholds,
                 mining_config: MiningConfig, period_ms: int,
                 scripted_plays: dict[int, int]):
        super().__init__(name)
        self.vehicle = vehicle
        self.cloud = cloud
        self.profile = profile
        self.rng = profile.make_rng()
        self.mood_source = mood_source
        self.thresholds = thresholds
        self.mining_config = mining_config
        self.period_ms = period_ms
        self.scripted_plays = dict(scripted_plays)
        self.reported_plays: dict[int, int] = {}
        self.obs_by_period: dict[int, ActivityObservation] = {}
        self.transactions: list[mining.ContextTransaction] = []
        self.rules: list[mining.AssociationRule] = []
        self.notes: list[dict] = []
        self._pending: dict[int, dict] = {}

    def handle(self, env: Envelope):
        if env.msg_type is MsgType.SENSOR_BATCH:
            kind = env.payload.get("kind")
            if kind == "camera":
                self._on_camera(env.payload)
            else:
                self._pending.setdefault(env.payload["period"], {})[kind] = env.payload
                self._maybe_fuse(env.payload["period"])
        elif env.msg_type is MsgType.REPAIR_PLAN:
            next_play = env.payload.get("next_play")
            if next_play is not None:
                self.reported_plays[env.payload["period"] + 1] = int(next_play)

    def _on_camera(self, payload: dict):
        t = payload["t_ms"]
        period = period_of(t, self.period_ms)
        obs = classify_activity(
            self.profile, ACTIVITY_TABLE[payload["true_class"]], self.rng,
            t_ms=t, period_index=period,
        )
        self.obs_by_period[period] = obs
        self.send(self.vehicle, MsgType.ACTIVITY_EVENT, {
            "t_ms": t,
            "period": period,
            "activity": obs.activity.id,
            "meta": obs.activity.meta.value,
            "confidence": obs.confidence,
        })

    def _maybe_fuse(self, period: int):
        batch = self._pending.get(period, {})
        if "physiological" not in batch or "environment" not in batch:
            return
        obs = self.obs_by_period.get(period)
        if obs is None:
            self.notes.append({"period": period, "note": "no_activity_observation"})
            del self._pending[period]
            return
        phys, envb = batch["physiological"], batch["environment"]

        features = {}
        for name, samples in phys["channels"].items():
            channel = Channel(name)
            frame = SensorFrame(channel, (period - 1) * self.period_ms,
                                phys["rates"][name], np.asarray(samples))
            features[channel] = window_features(preprocess_physiological(frame).samples)

        mood = self.mood_source.estimate(period, features)
        snapshot = env_snapshot(
            SensorFrame(Channel.LIGHT, 0, 1.0, np.asarray(envb[Channel.LIGHT.value])),
            SensorFrame(Channel.TEMPERATURE, 0, 1.0, np.asarray(envb[Channel.TEMPERATURE.value])),
            SensorFrame(Channel.HUMIDITY, 0, 1.0, np.asarray(envb[Channel.HUMIDITY.value])),
            window_len=envb["window"],
        )
        playing = self.scripted_plays.get(period, self.reported_plays.get(period))
        tx = mining.fuse_context(obs, mood, snapshot, playing, self.thresholds)
        self.transactions.append(tx)
        del self._pending[period]

        mined = False
        if period % self.mining_config.every_periods == 0:
            frequent = mining.apriori_frequent(self.transactions, self.mining_config.min_support)
            self.rules = mining.apriori_rules(frequent, self.mining_config.min_confidence)
            mined = True
            self.send(self.vehicle, MsgType.RULE_SET, {
                "period": period,
                "rules": [
                    {
                        "antecedent": sorted(r.antecedent),
                        "consequent": r.consequent,
                        "support": r.support,
                        "confidence": r.confidence,
                    }
                    for r in self.rules
                ],
            })
            self.send(self.cloud, MsgType.TRANSACTION_BATCH, {
                "period": period,
                "transactions": [
                    {"period": t.period, "items": sorted(t.items)} for t in self.transactions
                ],
            })

        self.send(self.vehicle, MsgType.MOOD_RESULT, {
            "period": period,
            "valence": mood.state.valence,
            "arousal": mood.state.arousal,
            "mood": mood_lookup(mood.state).name,
            "items": sorted(tx.items),
            "playing": playing,
            "mined": mined,
        })


@dataclass
class PlannerConfig:
    horizon: int = 5
    alpha: float = 1.0
    target_min_valence: int = 6
    state_grid: int = 9


class OnVehicleNode(Node):
    """Safety notifications, lifelog learning and repair planning."""

    kind = "OnVehicle"

    def __init__(self, name: str, edge: str, cloud: str, *,
                 planner: PlannerConfig, scripted_plays: dict[int, int]):
        super().__init__(name)
        self.edge = edge
        self.cloud = cloud
        self.planner = planner
        self.scripted_plays = dict(scripted_plays)
        self.catalog: dict[int, ContentId] | None = None
        self.model = recommend.TransitionModel(
            alpha=planner.alpha, space=recommend.StateSpace.from_grid(planner.state_grid)
        )
        self.target = recommend.min_valence_target(planner.target_min_valence)
        self.rules: list[mining.AssociationRule] = []
        self.last_state: AffectiveState | None = None
        self.last_period: int | None = None
        self.play_decisions: dict[int, int] = {}
        self.plans: list[dict] = []
        self.snapshots: dict[str, recommend.TransitionModel] = {}
        self.notifications = 0

    def start(self):
        self.at(0, lambda: self.send(
            self.cloud, MsgType.CATALOG_REQUEST, {"reply_to": self.name}
        ))

    def handle(self, env: Envelope):
        if env.msg_type is MsgType.ACTIVITY_EVENT:
            self._on_activity(env.payload)
        elif env.msg_type is MsgType.RULE_SET:
            self.rules = [mining.rule_from_dict(r) for r in env.payload["rules"]]
        elif env.msg_type is MsgType.CATALOG_RESPONSE:
            self.catalog = {
                int(c["id"]): ContentId(int(c["id"]), c["title"], int(c["valence_tendency"]))
                for c in env.payload["contents"]
            }
        elif env.msg_type is MsgType.MOOD_RESULT:
            self._on_mood(env.payload)

    def _on_activity(self, payload: dict):
        activity = ACTIVITY_TABLE[payload["activity"]]
        if activity.id == 0:
            message = "Safe driving"
        else:
            message = f"Distracted driving: {activity.description}"
        self.notifications += 1
        self.send(self.name, MsgType.SAFETY_NOTIFICATION, {
            "t_ms": payload["t_ms"],
            "activity": activity.id,
            "meta": activity.meta.value,
            "message": message,
        })

    def _playing_during(self, period: int) -> int | None:
        if period in self.scripted_plays:
            return self.scripted_plays[period]
        return self.play_decisions.get(period)

    def _on_mood(self, payload: dict):
        period = payload["period"]
        state = AffectiveState(payload["valence"], payload["arousal"])
        playing = self._playing_during(period)
        if (
            self.last_state is not None
            and self.last_period == period - 1
            and playing is not None
        ):
            self.model.observe(self.last_state, playing, state)

        plan = None
        candidates: list[int] = []
        if self.catalog is None:
            status = "no_catalog"
        else:
            candidates = recommend.candidate_contents(
                self.rules, frozenset(payload["items"]), list(self.catalog)
            )
            plan = recommend.plan_repair(
                self.model, state, self.target, self.planner.horizon, candidates
            )
            if plan is None:
                status = "no_plan"
            elif not plan.contents:
                status = "already_target"
            else:
                status = "ok"

        next_play = self.scripted_plays.get(
            period + 1,
            plan.contents[0] if plan is not None and plan.contents else None,
        )
        if next_play is not None:
            self.play_decisions[period + 1] = int(next_play)

        digest = self.model.digest()
        self.snapshots[digest] = recommend.TransitionModel(
            alpha=self.model.alpha, space=self.model.space,
            contents=self.model.contents, counts=dict(self.model.counts),
        )
        record = {
            "period": period,
            "status": status,
            "plan": plan.to_dict() if plan is not None else None,
            "candidates": candidates,
            "model_digest": digest,
            "next_play": next_play,
        }
        self.plans.append(record)
        self.send(self.edge, MsgType.REPAIR_PLAN, record)
        self.last_state = state
        self.last_period = period


class CloudNode(Node):
    """Catalog service stub plus a lifelog archive."""

    kind = "Cloud"

    def __init__(self, name: str, catalog: dict[int, ContentId]):
        super().__init__(name)
        self.catalog = catalog
        self.archive: list[dict] = []

    def handle(self, env: Envelope):
        if env.msg_type is MsgType.CATALOG_REQUEST:
            self.send(env.payload["reply_to"], MsgType.CATALOG_RESPONSE, {
                "contents": [
                    {"id": c.id, "title": c.title, "valence_tendency": c.valence_tendency}
                    for c in sorted(self.catalog.values(), key=lambda c: c.id)
                ],
            })
        elif env.msg_type is MsgType.TRANSACTION_BATCH:
            self.archive.append(env.payload)
