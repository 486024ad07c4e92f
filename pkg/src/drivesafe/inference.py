"""Pluggable activity/mood classifiers and classification-report metrics.

The heavyweight vision models are out of scope; a row-stochastic confusion
profile stands in for the activity recognizer and mood estimates come from
a replay trace or a small deterministic rule table over window features.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .domain import ActivityClass, ActivityMeta, AffectiveState, activity_meta
from .errors import DomainError, EndOfReplay
from .sigproc import Channel, WindowFeatures

N_ACTIVITY_CLASSES = 10
_ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ActivityObservation:
    t_ms: int
    activity: ActivityClass
    confidence: float
    period_index: int | None = None

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise DomainError(f"confidence {self.confidence} outside [0, 1]")


class MoodSourceKind(str, Enum):
    STUB = "Stub"
    REPLAY = "Replay"


@dataclass(frozen=True)
class MoodEstimate:
    state: AffectiveState
    period_index: int
    source: MoodSourceKind


@dataclass(frozen=True)
class ClassifierProfile:
    """Row-stochastic map from true class to predicted-class probabilities."""

    confusion: np.ndarray
    seed: int = 0

    def __post_init__(self):
        m = np.asarray(self.confusion, dtype=float)
        if m.shape != (N_ACTIVITY_CLASSES, N_ACTIVITY_CLASSES):
            raise DomainError(f"profile must be 10x10, got {m.shape}")
        if (m < 0).any():
            raise DomainError("profile entries must be non-negative")
        if np.abs(m.sum(axis=1) - 1.0).max() > _ROW_SUM_TOL:
            raise DomainError("profile rows must sum to 1")
        object.__setattr__(self, "confusion", m)

    def make_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    @classmethod
    def identity(cls, seed: int = 0) -> "ClassifierProfile":
        return cls(np.eye(N_ACTIVITY_CLASSES), seed=seed)

    @classmethod
    def from_binary_rates(
        cls, distracted_as_safe: float, safe_as_distracted: float = 0.0, seed: int = 0
    ) -> "ClassifierProfile":
        """Lift binary meta-class error rates to a 10-class profile.

        The safe row keeps ``1 - safe_as_distracted`` on itself and spreads
        the rest uniformly over the nine distracted classes; each distracted
        row keeps its own class except for the mass misread as safe.
        """
        m = np.zeros((N_ACTIVITY_CLASSES, N_ACTIVITY_CLASSES))
        m[0, 0] = 1.0 - safe_as_distracted
        m[0, 1:] = safe_as_distracted / 9.0
        for i in range(1, N_ACTIVITY_CLASSES):
            m[i, 0] = distracted_as_safe
            m[i, i] = 1.0 - distracted_as_safe
        return cls(m, seed=seed)

    def save_tsv(self, path: str | Path) -> None:
        np.savetxt(path, self.confusion, delimiter="\t", fmt="%.12g")

    @classmethod
    def load_tsv(cls, path: str | Path, seed: int = 0) -> "ClassifierProfile":
        return cls(np.loadtxt(path, delimiter="\t"), seed=seed)


def classify_activity(
    profile: ClassifierProfile,
    true_class: ActivityClass,
    rng: np.random.Generator,
    t_ms: int = 0,
    period_index: int | None = None,
) -> ActivityObservation:
    """Draw a predicted class from the profile row of the true class."""
    row = profile.confusion[true_class.id]
    predicted = int(rng.choice(N_ACTIVITY_CLASSES, p=row))
    from .domain import ACTIVITY_TABLE

    return ActivityObservation(
        t_ms=t_ms,
        activity=ACTIVITY_TABLE[predicted],
        confidence=float(row[predicted]),
        period_index=period_index,
    )


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    zero_predicted: bool = False


@dataclass(frozen=True)
class ClassificationReport:
    per_class: dict[ActivityMeta, ClassMetrics]
    micro_avg: ClassMetrics
    weighted_avg: ClassMetrics
    accuracy: float


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def classification_report(
    pairs: list[tuple[ActivityMeta, ActivityMeta]],
) -> ClassificationReport:
    """Precision/recall/F1 per meta class plus micro and weighted rows.

    Micro metrics pool TP/FP/FN over classes; for single-label problems
    micro precision equals micro recall equals accuracy.  A class that is
    never predicted gets precision 0 with ``zero_predicted`` set.
    """
    if not pairs:
        raise DomainError("classification_report needs at least one pair")
    classes = [ActivityMeta.SAFE, ActivityMeta.DISTRACTED]
    total = len(pairs)
    per_class: dict[ActivityMeta, ClassMetrics] = {}
    pooled_tp = pooled_fp = pooled_fn = 0
    for cls in classes:
        tp = sum(1 for t, p in pairs if t == cls and p == cls)
        fp = sum(1 for t, p in pairs if t != cls and p == cls)
        fn = sum(1 for t, p in pairs if t == cls and p != cls)
        support = tp + fn
        zero_pred = (tp + fp) == 0
        precision = 0.0 if zero_pred else tp / (tp + fp)
        recall = 0.0 if support == 0 else tp / support
        per_class[cls] = ClassMetrics(precision, recall, _f1(precision, recall), support, zero_pred)
        pooled_tp += tp
        pooled_fp += fp
        pooled_fn += fn

    micro_p = pooled_tp / (pooled_tp + pooled_fp)
    micro_r = pooled_tp / (pooled_tp + pooled_fn)
    micro = ClassMetrics(micro_p, micro_r, _f1(micro_p, micro_r), total)

    weights = {c: per_class[c].support / total for c in classes}
    weighted = ClassMetrics(
        sum(per_class[c].precision * weights[c] for c in classes),
        sum(per_class[c].recall * weights[c] for c in classes),
        sum(per_class[c].f1 * weights[c] for c in classes),
        total,
    )
    accuracy = sum(1 for t, p in pairs if t == p) / total
    return ClassificationReport(per_class, micro, weighted, accuracy)


def expand_confusion(matrix) -> list[tuple[ActivityMeta, ActivityMeta]]:
    """Expand a 2x2 meta confusion matrix (rows true, cols predicted)."""
    m = np.asarray(matrix, dtype=int)
    if m.shape != (2, 2) or (m < 0).any():
        raise DomainError("expected a non-negative 2x2 matrix")
    classes = [ActivityMeta.SAFE, ActivityMeta.DISTRACTED]
    pairs = []
    for i, true_cls in enumerate(classes):
        for j, pred_cls in enumerate(classes):
            pairs.extend([(true_cls, pred_cls)] * int(m[i, j]))
    return pairs


def meta_pairs(
    observations: list[tuple[int, int]],
) -> list[tuple[ActivityMeta, ActivityMeta]]:
    """Collapse (true id, predicted id) pairs to binary meta classes."""
    return [(activity_meta(t), activity_meta(p)) for t, p in observations]


@dataclass(frozen=True)
class StubRules:
    """Monotone feature-to-band rules standing in for the mood model.

    Arousal follows the EDA window spread (more spread, more arousal);
    valence falls as the EMG amplitude rises, since sustained trapezius
    activity tracks stress.
    """

    eda_std_cuts: tuple[float, float, float] = (0.05, 0.2, 0.5)
    arousal_bands: tuple[int, int, int, int] = (1, 4, 6, 9)
    emg_amp_cuts: tuple[float, float, float] = (0.05, 0.2, 0.5)
    valence_bands: tuple[int, int, int, int] = (8, 6, 4, 2)

    @staticmethod
    def _band(value: float, cuts, bands) -> int:
        for i, cut in enumerate(cuts):
            if value < cut:
                return bands[i]
        return bands[-1]

    def apply(self, features: dict[Channel, WindowFeatures]) -> tuple[int, int]:
        if Channel.EDA not in features or Channel.EMG not in features:
            raise DomainError("stub mood rules need EDA and EMG features")
        arousal = self._band(features[Channel.EDA].std, self.eda_std_cuts, self.arousal_bands)
        valence = self._band(
            abs(features[Channel.EMG].mean), self.emg_amp_cuts, self.valence_bands
        )
        return valence, arousal


@dataclass
class ReplayMoodSource:
    trace: dict[int, tuple[int, int]]
    kind: MoodSourceKind = field(default=MoodSourceKind.REPLAY, init=False)

    def estimate(self, period: int, features=None) -> MoodEstimate:
        if period not in self.trace:
            raise EndOfReplay(f"mood trace has no entry for period {period}")
        v, a = self.trace[period]
        return MoodEstimate(AffectiveState(v, a), period, MoodSourceKind.REPLAY)


@dataclass
class StubMoodSource:
    rules: StubRules = field(default_factory=StubRules)
    kind: MoodSourceKind = field(default=MoodSourceKind.STUB, init=False)

    def estimate(self, period: int, features: dict[Channel, WindowFeatures]) -> MoodEstimate:
        v, a = self.rules.apply(features)
        return MoodEstimate(AffectiveState(v, a), period, MoodSourceKind.STUB)


def estimate_mood(
    period: int,
    mode: MoodSourceKind,
    *,
    trace: dict[int, tuple[int, int]] | None = None,
    rules: StubRules | None = None,
    features: dict[Channel, WindowFeatures] | None = None,
) -> MoodEstimate:
    """Estimate the per-period affective state from a trace or stub rules."""
    if mode is MoodSourceKind.REPLAY:
        if trace is None:
            raise DomainError("replay mode requires a trace")
        return ReplayMoodSource(trace).estimate(period)
    if features is None:
        raise DomainError("stub mode requires window features")
    return StubMoodSource(rules or StubRules()).estimate(period, features)


def load_mood_trace(path: str | Path) -> dict[int, tuple[int, int]]:
    """Read a (period, valence, arousal) TSV into a replay trace."""
    trace: dict[int, tuple[int, int]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split("\t")
        if header != ["period", "valence", "arousal"]:
            raise DomainError(f"unexpected mood trace header {header}")
        for line in fh:
            if not line.strip():
                continue
            p, v, a = line.strip().split("\t")
            trace[int(p)] = (int(v), int(a))
    return trace


def save_mood_trace(path: str | Path, trace: dict[int, tuple[int, int]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("period\tvalence\tarousal\n")
        for period in sorted(trace):
            v, a = trace[period]
            fh.write(f"{period}\t{v}\t{a}\n")
