"""Context fusion into itemset transactions and Apriori rule mining.

One transaction per mood period: activity, arousal, valence and the three
environment buckets, plus the content playing that period when there was
one.  Rules map context antecedents to a single content consequent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from . import _kernels
from .domain import ContentId, EnvironmentThresholds
from .errors import ConsistencyError, DomainError
from .inference import ActivityObservation, MoodEstimate
from .sigproc import EnvSnapshot

CONTENT_PREFIX = "content_"
_ITEM_TYPES = ("activity_", "arousal_", "valence_", "env_light_", "env_temp_", "env_hum_", CONTENT_PREFIX)


@dataclass(frozen=True)
class ContextTransaction:
    items: frozenset[str]
    period: int

    def __post_init__(self):
        seen = {}
        for item in self.items:
            kind = _item_type(item)
            if kind in seen:
                raise DomainError(f"duplicate {kind!r} items: {seen[kind]}, {item}")
            seen[kind] = item
        for required in ("activity_", "arousal_", "valence_"):
            if required not in seen:
                raise DomainError(f"transaction missing a {required!r} item")

    @property
    def content_item(self) -> str | None:
        for item in self.items:
            if item.startswith(CONTENT_PREFIX):
                return item
        return None


def _item_type(item: str) -> str:
    for prefix in _ITEM_TYPES:
        if item.startswith(prefix):
            return prefix
    raise DomainError(f"unknown item type for {item!r}")


def content_item_id(item: str) -> int:
    if not item.startswith(CONTENT_PREFIX):
        raise DomainError(f"{item!r} is not a content item")
    return int(item[len(CONTENT_PREFIX):])


@dataclass(frozen=True)
class AssociationRule:
    antecedent: frozenset[str]
    consequent: str
    support: float
    confidence: float

    def __post_init__(self):
        if self.consequent in self.antecedent:
            raise DomainError("consequent may not appear in the antecedent")
        if any(i.startswith(CONTENT_PREFIX) for i in self.antecedent):
            raise DomainError("antecedents are context-only")

    @property
    def content_id(self) -> int:
        return content_item_id(self.consequent)


def fuse_context(
    activity: ActivityObservation,
    mood: MoodEstimate,
    env: EnvSnapshot,
    playing: ContentId | int | None = None,
    thresholds: EnvironmentThresholds | None = None,
) -> ContextTransaction:
    """Fuse one period's observations into a typed itemset transaction."""
    period = mood.period_index
    if activity.period_index is not None and activity.period_index != period:
        raise ConsistencyError(
            f"activity period {activity.period_index} != mood period {period}"
        )
    thresholds = thresholds or EnvironmentThresholds()
    bucket = thresholds.bucket(env.light.mean, env.temperature.mean, env.humidity.mean)
    items = {
        f"activity_{activity.activity.id}",
        f"arousal_{mood.state.arousal}",
        f"valence_{mood.state.valence}",
        f"env_light_{bucket.light.value}",
        f"env_temp_{bucket.temperature.value}",
        f"env_hum_{bucket.humidity.value}",
    }
    if playing is not None:
        content_id = playing.id if isinstance(playing, ContentId) else int(playing)
        items.add(f"{CONTENT_PREFIX}{content_id}")
    return ContextTransaction(items=frozenset(items), period=period)


def _pack_bitsets(itemsets, index: dict[str, int], n_words: int) -> np.ndarray:
    words = np.zeros((len(itemsets), n_words), dtype=np.uint64)
    for row, items in enumerate(itemsets):
        for item in items:
            bit = index[item]
            words[row, bit >> 6] |= np.uint64(1) << np.uint64(bit & 63)
    return words


def apriori_frequent(
    db: list[ContextTransaction] | list[frozenset[str]], min_support: float = 0.1
) -> dict[frozenset[str], float]:
    """All itemsets with relative support >= min_support (downward closed).

    Accepts either ContextTransaction rows or plain item sets.
    """
    if not db:
        raise DomainError("transaction database is empty")
    if not (0.0 < min_support <= 1.0):
        raise DomainError(f"min_support {min_support} outside (0, 1]")
    rows = [tx.items if isinstance(tx, ContextTransaction) else frozenset(tx) for tx in db]
    n = len(rows)
    vocab = sorted({item for items in rows for item in items})
    index = {item: i for i, item in enumerate(vocab)}
    n_words = max(1, (len(vocab) + 63) >> 6)
    tx_words = _pack_bitsets(rows, index, n_words)

    frequent: dict[frozenset[str], float] = {}

    def survivors(candidates: list[tuple[str, ...]]) -> list[tuple[str, ...]]:
        if not candidates:
            return []
        cand_words = _pack_bitsets(candidates, index, n_words)
        counts = _kernels.support_counts(tx_words, cand_words)
        kept = []
        for cand, count in zip(candidates, counts):
            support = int(count) / n
            if support >= min_support:
                frequent[frozenset(cand)] = support
                kept.append(cand)
        return kept

    level = survivors([(item,) for item in vocab])
    k = 2
    while level:
        level = survivors(_join_and_prune(level, k))
        k += 1
    return frequent


def _join_and_prune(level: list[tuple[str, ...]], k: int) -> list[tuple[str, ...]]:
    # classic Apriori candidate generation: join (k-1)-itemsets sharing a
    # (k-2)-prefix, then drop candidates with an infrequent (k-1)-subset
    prev = set(level)
    ordered = sorted(level)
    candidates = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if a[:-1] != b[:-1]:
                break
            cand = a + (b[-1],)
            if all(tuple(sub) in prev for sub in combinations(cand, k - 1)):
                candidates.append(cand)
    return candidates


def apriori_rules(
    frequent: dict[frozenset[str], float], min_confidence: float = 0.6
) -> list[AssociationRule]:
    """Context -> content rules with confidence >= min_confidence.

    Consequents are restricted to single content items; antecedents are the
    non-empty context remainder.  Output order is lexicographic by
    (antecedent items, consequent).
    """
    rules = []
    for itemset, support in frequent.items():
        contents = [i for i in itemset if i.startswith(CONTENT_PREFIX)]
        if len(contents) != 1 or len(itemset) < 2:
            continue
        consequent = contents[0]
        antecedent = frozenset(itemset - {consequent})
        confidence = support / frequent[antecedent]
        if confidence >= min_confidence:
            rules.append(AssociationRule(antecedent, consequent, support, confidence))
    rules.sort(key=lambda r: (sorted(r.antecedent), r.consequent))
    return rules


def save_transactions(path: str | Path, db: list[ContextTransaction]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tx in db:
            fh.write(transaction_to_json(tx) + "\n")


def transaction_to_json(tx: ContextTransaction) -> str:
    return json.dumps({"period": tx.period, "items": sorted(tx.items)}, sort_keys=True)


def load_transactions(path: str | Path) -> list[ContextTransaction]:
    db = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            db.append(ContextTransaction(frozenset(rec["items"]), int(rec["period"])))
    return db


def save_rules(path: str | Path, rules: list[AssociationRule]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rule in rules:
            fh.write(rule_to_json(rule) + "\n")


def rule_to_json(rule: AssociationRule) -> str:
    return json.dumps(
        {
            "antecedent": sorted(rule.antecedent),
            "consequent": rule.consequent,
            "support": rule.support,
            "confidence": rule.confidence,
        },
        sort_keys=True,
    )


def rule_from_dict(rec: dict) -> AssociationRule:
    return AssociationRule(
        frozenset(rec["antecedent"]), rec["consequent"],
        float(rec["support"]), float(rec["confidence"]),
    )


def load_rules(path: str | Path) -> list[AssociationRule]:
    with open(path, encoding="utf-8") as fh:
        return [rule_from_dict(json.loads(line)) for line in fh if line.strip()]
