"""Synthetic driver sessions: waveforms, traces and runnable replay bundles.

A session script describes activity segments, per-period mood waypoints,
environment/physiology waveform profiles and scripted content plays.
``emit_session`` turns one into the CSV/TSV bundle plus a manifest that
the scenario runner consumes directly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domain import ACTIVITY_TABLE
from .errors import ScenarioError
from .sigproc import DEFAULT_RATES, Channel, SensorFrame

PHYS_CHANNELS = (Channel.EMG, Channel.ECG, Channel.EDA, Channel.EEG)
ENV_CHANNELS = (Channel.LIGHT, Channel.TEMPERATURE, Channel.HUMIDITY)

_CHANNEL_SALT = {ch: i for i, ch in enumerate(Channel)}


@dataclass(frozen=True)
class WaveProfile:
    baseline: float = 0.0
    drift_per_s: float = 0.0
    noise_sigma: float = 0.0
    components: tuple[tuple[float, float], ...] = ()  # (freq_hz, amplitude)


DEFAULT_PHYS_PROFILES = {
    Channel.EMG: WaveProfile(baseline=0.0, noise_sigma=0.05, components=((40.0, 1.0),)),
    Channel.ECG: WaveProfile(baseline=0.0, noise_sigma=0.02, components=((1.2, 1.0), (8.0, 0.3))),
    Channel.EDA: WaveProfile(baseline=2.0, drift_per_s=0.001, noise_sigma=0.01),
    Channel.EEG: WaveProfile(baseline=0.0, noise_sigma=0.05, components=((2.0, 1.0),)),
}

DEFAULT_ENV_PROFILES = {
    Channel.LIGHT: WaveProfile(baseline=600.0, noise_sigma=5.0),
    Channel.TEMPERATURE: WaveProfile(baseline=22.0, noise_sigma=0.1),
    Channel.HUMIDITY: WaveProfile(baseline=45.0, noise_sigma=1.0),
}


@dataclass
class SessionScript:
    duration_s: int
    activity_segments: list[tuple[int, int, int]]  # (start_s, end_s, class_id)
    mood_waypoints: list[tuple[int, int, int]]     # (period, valence, arousal)
    seed: int = 0
    period_s: int = 120
    tick_ms: int = 300
    points_per_period: int = 8064
    env_rate: float = 1.0
    env_window: int = 30
    content_plays: list[tuple[int, int]] = field(default_factory=list)
    phys_profiles: dict[Channel, WaveProfile] = field(default_factory=lambda: dict(DEFAULT_PHYS_PROFILES))
    env_profiles: dict[Channel, WaveProfile] = field(default_factory=lambda: dict(DEFAULT_ENV_PROFILES))
    manifest_overrides: dict = field(default_factory=dict)

    @property
    def n_periods(self) -> int:
        return self.duration_s // self.period_s

    def validate(self) -> None:
        if self.duration_s <= 0 or self.period_s <= 0 or self.n_periods < 1:
            raise ScenarioError("duration must cover at least one mood period")
        expected = 0
        for start, end, cls in self.activity_segments:
            if start != expected or end <= start:
                raise ScenarioError(f"activity segments must tile [0, duration), bad ({start}, {end})")
            if cls not in ACTIVITY_TABLE:
                raise ScenarioError(f"unknown activity class {cls}")
            expected = end
        if expected != self.duration_s:
            raise ScenarioError(f"activity segments end at {expected}s, expected {self.duration_s}s")
        if not self.mood_waypoints or self.mood_waypoints[0][0] != 1:
            raise ScenarioError("mood waypoints must start at period 1")
        periods = [p for p, _, _ in self.mood_waypoints]
        if periods != sorted(set(periods)):
            raise ScenarioError("mood waypoint periods must be strictly increasing")
        for p, v, a in self.mood_waypoints:
            if not (1 <= v <= 9 and 1 <= a <= 9):
                raise ScenarioError(f"waypoint ({p}, {v}, {a}) outside the 9x9 grid")
        for p, c in self.content_plays:
            if not (1 <= p <= self.n_periods):
                raise ScenarioError(f"content play names period {p} outside 1..{self.n_periods}")
            if c < 1:
                raise ScenarioError(f"content id {c} must be >= 1")
        if self.env_rate * self.period_s < self.env_window:
            raise ScenarioError("environment rate too low for the window length")

    def mood_trace(self) -> dict[int, tuple[int, int]]:
        trace = {}
        current = None
        waypoints = {p: (v, a) for p, v, a in self.mood_waypoints}
        for m in range(1, self.n_periods + 1):
            current = waypoints.get(m, current)
            trace[m] = current
        return trace


def synth_waveform(
    channel: Channel,
    profile: WaveProfile,
    duration_s: float,
    rate: float,
    seed: int,
    t_start_s: float = 0.0,
) -> SensorFrame:
    """Baseline + drift + sinusoid components + seeded Gaussian noise."""
    n = int(round(duration_s * rate))
    t = t_start_s + np.arange(n) / rate
    x = np.full(n, float(profile.baseline)) + profile.drift_per_s * t
    for freq, amp in profile.components:
        x = x + amp * np.sin(2.0 * np.pi * freq * t)
    if profile.noise_sigma > 0:
        rng = np.random.default_rng([seed, _CHANNEL_SALT[channel], int(round(t_start_s * 1000))])
        x = x + rng.normal(0.0, profile.noise_sigma, n)
    return SensorFrame(channel, int(round(t_start_s * 1000)), rate, x)


def _write_csv(path: Path, ts: list[int], values: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_ms", "value"])
        for t, v in zip(ts, values):
            writer.writerow([t, repr(float(v))])


def emit_session(script: SessionScript, out_dir: str | Path) -> Path:
    """Write the replay bundle for a script; returns the manifest path."""
    script.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    period_ms = script.period_s * 1000
    duration_ms = script.duration_s * 1000
    replay: dict[str, str] = {}

    for channel in PHYS_CHANNELS:
        rate = DEFAULT_RATES[channel]
        n = min(script.points_per_period, int(script.period_s * rate))
        ts: list[int] = []
        values: list[float] = []
        for m in range(1, script.n_periods + 1):
            window_s = n / rate
            t_start = m * script.period_s - window_s
            frame = synth_waveform(channel, script.phys_profiles[channel], window_s, rate,
                                   script.seed, t_start_s=t_start)
            end_ms = m * period_ms
            ts.extend(end_ms - int(round((n - 1 - i) * 1000.0 / rate)) for i in range(n))
            values.extend(frame.samples)
        name = f"{channel.value.lower()}.csv"
        _write_csv(out_dir / name, ts, np.asarray(values))
        replay[channel.value.lower()] = name

    for channel in ENV_CHANNELS:
        rate = script.env_rate
        frame = synth_waveform(channel, script.env_profiles[channel], script.duration_s, rate,
                               script.seed)
        dt_ms = 1000.0 / rate
        ts = [int(round((i + 1) * dt_ms)) for i in range(len(frame.samples))]
        name = f"{channel.value.lower()}.csv"
        _write_csv(out_dir / name, ts, frame.samples)
        replay[channel.value.lower()] = name

    with open(out_dir / "mood_trace.tsv", "w", encoding="utf-8") as fh:
        fh.write("period\tvalence\tarousal\n")
        for m, (v, a) in sorted(script.mood_trace().items()):
            fh.write(f"{m}\t{v}\t{a}\n")

    with open(out_dir / "activity_truth.tsv", "w", encoding="utf-8") as fh:
        fh.write("start_ms\tend_ms\tclass\n")
        for start, end, cls in script.activity_segments:
            fh.write(f"{start * 1000}\t{end * 1000}\t{cls}\n")

    manifest = {
        "driver_id": "driver-1",
        "seed": script.seed,
        "duration_ms": duration_ms,
        "tick_ms": script.tick_ms,
        "period_ms": period_ms,
        "points_per_period": script.points_per_period,
        "env_window": script.env_window,
        "rates": {ch.value: DEFAULT_RATES[ch] for ch in PHYS_CHANNELS}
        | {ch.value: script.env_rate for ch in ENV_CHANNELS},
        "replay": replay,
        "mood_trace": "mood_trace.tsv",
        "activity_truth": "activity_truth.tsv",
        "mood_mode": "Replay",
    }
    if script.content_plays:
        with open(out_dir / "plays.tsv", "w", encoding="utf-8") as fh:
            fh.write("period\tcontent\n")
            for p, c in sorted(script.content_plays):
                fh.write(f"{p}\t{c}\n")
        manifest["content_plays"] = "plays.tsv"
    manifest.update(script.manifest_overrides)

    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    return manifest_path


def load_script(path: str | Path) -> SessionScript:
    """Read a session script from its JSON form."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    phys = dict(DEFAULT_PHYS_PROFILES)
    for name, spec in raw.get("phys", {}).items():
        phys[Channel(name)] = _profile_from(spec)
    env = dict(DEFAULT_ENV_PROFILES)
    for name, spec in raw.get("env", {}).items():
        env[Channel(name)] = _profile_from(spec)
    return SessionScript(
        duration_s=int(raw["duration_s"]),
        activity_segments=[tuple(seg) for seg in raw["activity_segments"]],
        mood_waypoints=[tuple(w) for w in raw["mood_waypoints"]],
        seed=int(raw.get("seed", 0)),
        period_s=int(raw.get("period_s", 120)),
        tick_ms=int(raw.get("tick_ms", 300)),
        points_per_period=int(raw.get("points_per_period", 8064)),
        env_rate=float(raw.get("env_rate", 1.0)),
        env_window=int(raw.get("env_window", 30)),
        content_plays=[tuple(p) for p in raw.get("content_plays", [])],
        phys_profiles=phys,
        env_profiles=env,
        manifest_overrides=raw.get("manifest_overrides", {}),
    )


def _profile_from(spec: dict) -> WaveProfile:
    return WaveProfile(
        baseline=float(spec.get("baseline", 0.0)),
        drift_per_s=float(spec.get("drift_per_s", 0.0)),
        noise_sigma=float(spec.get("noise_sigma", 0.0)),
        components=tuple((float(f), float(a)) for f, a in spec.get("components", [])),
    )
