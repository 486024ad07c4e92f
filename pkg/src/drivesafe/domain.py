"""Shared vocabulary types and static lookup tables.

The mood grid (81 valence/arousal cells), the ten driver activity classes
and the default content catalog ship as checked-in TSV files so tests can
diff them against their sources verbatim.  Everything here is immutable
after load and safe to share across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import DomainError

VALENCE_MIN, VALENCE_MAX = 1, 9
AROUSAL_MIN, AROUSAL_MAX = 1, 9


class ActivityMeta(str, Enum):
    SAFE = "SafeDriving"
    DISTRACTED = "DistractedDriving"


class Polarity(str, Enum):
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"
    POSITIVE = "Positive"


class LightBucket(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class TemperatureBucket(str, Enum):
    COLD = "cold"
    COMFORT = "comfort"
    HOT = "hot"


class HumidityBucket(str, Enum):
    DRY = "dry"
    COMFORT = "comfort"
    HUMID = "humid"


@dataclass(frozen=True)
class ActivityClass:
    id: int
    description: str
    meta: ActivityMeta


@dataclass(frozen=True, order=True)
class AffectiveState:
    """One cell of the 9x9 valence/arousal grid."""

    valence: int
    arousal: int

    def __post_init__(self):
        if not (VALENCE_MIN <= self.valence <= VALENCE_MAX):
            raise DomainError(f"valence {self.valence} outside [1, 9]")
        if not (AROUSAL_MIN <= self.arousal <= AROUSAL_MAX):
            raise DomainError(f"arousal {self.arousal} outside [1, 9]")


@dataclass(frozen=True)
class MoodLabel:
    name: str
    polarity: Polarity


@dataclass(frozen=True)
class ContentId:
    id: int
    title: str
    valence_tendency: int

    def __post_init__(self):
        if self.id < 1:
            raise DomainError(f"content id must be >= 1, got {self.id}")


@dataclass(frozen=True)
class EnvironmentBucket:
    light: LightBucket
    temperature: TemperatureBucket
    humidity: HumidityBucket


@dataclass(frozen=True)
class EnvironmentThresholds:
    """Cut points discretizing environmental window means into buckets.

    The defaults split ambient light into terciles of a 0..1200 lux cabin
    range and use the usual comfort bands for temperature (18..26 degC)
    and relative humidity (30..60 %).
    """

    light_lux: tuple[float, float] = (400.0, 800.0)
    temperature_c: tuple[float, float] = (18.0, 26.0)
    humidity_rh: tuple[float, float] = (30.0, 60.0)

    def bucket(self, light: float, temperature: float, humidity: float) -> EnvironmentBucket:
        return EnvironmentBucket(
            light=_cut(light, self.light_lux, (LightBucket.LOW, LightBucket.MEDIUM, LightBucket.HIGH)),
            temperature=_cut(
                temperature, self.temperature_c,
                (TemperatureBucket.COLD, TemperatureBucket.COMFORT, TemperatureBucket.HOT),
            ),
            humidity=_cut(
                humidity, self.humidity_rh,
                (HumidityBucket.DRY, HumidityBucket.COMFORT, HumidityBucket.HUMID),
            ),
        )


def _cut(value, cuts, buckets):
    lo, hi = cuts
    if value < lo:
        return buckets[0]
    if value <= hi:
        return buckets[1]
    return buckets[2]


def _data_path(name: str) -> Path:
    return Path(str(resources.files("drivesafe").joinpath("data", name)))


def _read_tsv(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh, delimiter="\t"))


def load_mood_table(path: str | Path | None = None) -> dict[tuple[int, int], str]:
    """Load the (valence, arousal) -> mood name map; must cover all 81 cells."""
    rows = _read_tsv(Path(path) if path else _data_path("moods.tsv"))
    table: dict[tuple[int, int], str] = {}
    for row in rows:
        key = (int(row["valence"]), int(row["arousal"]))
        if key in table:
            raise DomainError(f"duplicate mood cell {key}")
        table[key] = row["mood"]
    expected = {(v, a) for v in range(1, 10) for a in range(1, 10)}
    if set(table) != expected:
        missing = sorted(expected - set(table))
        raise DomainError(f"mood table does not cover the 9x9 grid, missing {missing[:5]}")
    return table


def load_activity_table(path: str | Path | None = None) -> dict[int, ActivityClass]:
    rows = _read_tsv(Path(path) if path else _data_path("activities.tsv"))
    table = {
        int(r["id"]): ActivityClass(int(r["id"]), r["description"], ActivityMeta(r["meta"]))
        for r in rows
    }
    if sorted(table) != list(range(10)):
        raise DomainError("activity table must define exactly ids 0..9")
    safe = [a for a in table.values() if a.meta is ActivityMeta.SAFE]
    if [a.id for a in safe] != [0]:
        raise DomainError("exactly one SafeDriving class (id 0) is allowed")
    return table


def load_catalog(path: str | Path | None = None) -> dict[int, ContentId]:
    rows = _read_tsv(Path(path) if path else _data_path("catalog.tsv"))
    catalog: dict[int, ContentId] = {}
    for r in rows:
        cid = int(r["id"])
        if cid in catalog:
            raise DomainError(f"duplicate content id {cid}")
        catalog[cid] = ContentId(cid, r["title"], int(r["valence_tendency"]))
    return catalog


_MOODS = load_mood_table()
_ACTIVITIES = load_activity_table()

MOOD_TABLE = dict(_MOODS)
ACTIVITY_TABLE = dict(_ACTIVITIES)


def mood_lookup(state: AffectiveState) -> MoodLabel:
    """Resolve an affective state to its mood cell. Total on the 9x9 grid."""
    name = _MOODS[(state.valence, state.arousal)]
    return MoodLabel(name=name, polarity=polarity_of(state))


def polarity_of(state: AffectiveState) -> Polarity:
    """Polarity by valence coordinate: <=4 negative, 5 neutral, >=6 positive.

    Coordinates, not names, carry identity here: several names repeat
    across cells, so the valence axis is the only unambiguous sign.
    """
    if state.valence <= 4:
        return Polarity.NEGATIVE
    if state.valence == 5:
        return Polarity.NEUTRAL
    return Polarity.POSITIVE


def mood_polarity(name: str) -> Polarity:
    """Polarity of a known mood name via the coordinates that carry it.

    Raises DomainError for unknown names or names whose cells straddle
    the valence sign (none do in the shipped table).
    """
    cells = [k for k, v in _MOODS.items() if v == name]
    if not cells:
        raise DomainError(f"unknown mood label {name!r}")
    polarities = {polarity_of(AffectiveState(v, a)) for v, a in cells}
    if len(polarities) != 1:
        raise DomainError(f"mood label {name!r} spans multiple polarities")
    return polarities.pop()


def activity_meta(activity_id: int) -> ActivityMeta:
    """Meta class for an activity id: SafeDriving iff id == 0."""
    if activity_id not in _ACTIVITIES:
        raise DomainError(f"activity id {activity_id} outside 0..9")
    return _ACTIVITIES[activity_id].meta
