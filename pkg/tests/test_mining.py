import json

import numpy as np
import pytest

from drivesafe.domain import ACTIVITY_TABLE, AffectiveState, ContentId, EnvironmentThresholds
from drivesafe.errors import ConsistencyError, DomainError
from drivesafe.inference import ActivityObservation, MoodEstimate, MoodSourceKind
from drivesafe.mining import (
    AssociationRule,
    ContextTransaction,
    apriori_frequent,
    apriori_rules,
    fuse_context,
    load_rules,
    load_transactions,
    save_rules,
    save_transactions,
)
from drivesafe.sigproc import Channel, SensorFrame, env_snapshot

from .oracles import brute_force_frequent, brute_force_rules


def make_env(light=500.0, temp=22.0, hum=45.0):
    const = lambda ch, v: SensorFrame(ch, 0, 1.0, np.full(30, v))
    return env_snapshot(
        const(Channel.LIGHT, light), const(Channel.TEMPERATURE, temp), const(Channel.HUMIDITY, hum)
    )


def make_obs(activity_id, period):
    return ActivityObservation(0, ACTIVITY_TABLE[activity_id], 1.0, period_index=period)


def make_mood(valence, arousal, period):
    return MoodEstimate(AffectiveState(valence, arousal), period, MoodSourceKind.REPLAY)


class TestFuseContext:
    def test_tuple_example(self):
        tx = fuse_context(make_obs(3, 4), make_mood(2, 7, 4), make_env(), playing=20)
        assert tx.items == frozenset({
            "activity_3", "arousal_7", "valence_2",
            "env_light_medium", "env_temp_comfort", "env_hum_comfort",
            "content_20",
        })
        assert tx.period == 4

    def test_without_content(self):
        tx = fuse_context(make_obs(0, 1), make_mood(5, 5, 1), make_env())
        assert tx.content_item is None
        assert "activity_0" in tx.items

    def test_deterministic(self):
        args = (make_obs(3, 2), make_mood(2, 7, 2), make_env(), ContentId(20, "x", 1))
        assert fuse_context(*args) == fuse_context(*args)

    def test_period_mismatch(self):
        with pytest.raises(ConsistencyError):
            fuse_context(make_obs(3, 1), make_mood(2, 7, 2), make_env())

    def test_custom_thresholds_change_buckets(self):
        tx = fuse_context(
            make_obs(3, 1), make_mood(2, 7, 1), make_env(light=500.0),
            thresholds=EnvironmentThresholds(light_lux=(100.0, 300.0)),
        )
        assert "env_light_high" in tx.items

    def test_transaction_invariants(self):
        with pytest.raises(DomainError):
            ContextTransaction(frozenset({"activity_1", "activity_2", "arousal_1", "valence_1"}), 0)
        with pytest.raises(DomainError):
            ContextTransaction(frozenset({"arousal_1", "valence_1"}), 0)
        with pytest.raises(DomainError):
            ContextTransaction(frozenset({"activity_1", "arousal_1", "valence_1", "wat_9"}), 0)


def random_db(gen, n_tx=None, with_content=False):
    universe = ["activity_0", "activity_3", "arousal_5", "arousal_7",
                "valence_2", "env_light_low", "env_temp_hot", "env_hum_dry"]
    if with_content:
        universe = universe[:6] + ["content_7", "content_20"]
    n_tx = n_tx or int(gen.integers(1, 13))
    rows = []
    for _ in range(n_tx):
        size = int(gen.integers(1, len(universe) + 1))
        rows.append(frozenset(gen.choice(universe, size=size, replace=False).tolist()))
    return rows


class TestAprioriFrequent:
    def test_relative_support_example(self):
        rows = [frozenset({"arousal_7", "activity_3"})] * 4 + [frozenset({"activity_0"})] * 6
        out = apriori_frequent(rows, min_support=0.1)
        assert out[frozenset({"arousal_7"})] == pytest.approx(0.4)
        assert out[frozenset({"arousal_7", "activity_3"})] == pytest.approx(0.4)

    def test_unanimity_at_support_one(self):
        rows = [
            frozenset({"a", "b", "c"}),
            frozenset({"a", "b"}),
            frozenset({"a", "z"}),
        ]
        out = apriori_frequent(rows, min_support=1.0)
        assert set(out) == {frozenset({"a"})}

    def test_downward_closure(self):
        gen = np.random.default_rng(4)
        for _ in range(25):
            rows = random_db(gen)
            out = apriori_frequent(rows, min_support=0.25)
            for itemset in out:
                for item in itemset:
                    assert frozenset(itemset - {item}) in out or len(itemset) == 1

    def test_matches_brute_force(self):
        gen = np.random.default_rng(12)
        for _ in range(60):
            rows = random_db(gen)
            min_support = float(gen.choice([0.1, 0.25, 0.5, 1.0]))
            assert apriori_frequent(rows, min_support) == brute_force_frequent(rows, min_support)

    def test_monotone_in_min_support(self):
        gen = np.random.default_rng(99)
        rows = random_db(gen, n_tx=12)
        previous = None
        for ms in (0.1, 0.3, 0.5, 0.8, 1.0):
            keys = set(apriori_frequent(rows, ms))
            if previous is not None:
                assert keys <= previous
            previous = keys

    def test_empty_db_rejected(self):
        with pytest.raises(DomainError):
            apriori_frequent([], 0.1)
        with pytest.raises(DomainError):
            apriori_frequent([frozenset({"a"})], 0.0)


class TestAprioriRules:
    def test_division_oracle_example(self):
        frequent = {
            frozenset({"activity_3", "arousal_7", "valence_2"}): 0.3,
            frozenset({"activity_3", "arousal_7", "valence_2", "content_20"}): 0.24,
        }
        rules = apriori_rules(frequent, min_confidence=0.7)
        assert len(rules) == 1
        rule = rules[0]
        assert rule.antecedent == frozenset({"activity_3", "arousal_7", "valence_2"})
        assert rule.consequent == "content_20"
        assert rule.content_id == 20
        assert rule.confidence == pytest.approx(0.8)
        assert rule.support == pytest.approx(0.24)

    def test_min_confidence_one_means_always_cooccur(self):
        rows = (
            [frozenset({"activity_3", "arousal_7", "valence_2", "content_20"})] * 4
            + [frozenset({"activity_0", "arousal_5", "valence_2"})] * 6
        )
        rules = apriori_rules(apriori_frequent(rows, 0.1), min_confidence=1.0)
        assert rules
        for rule in rules:
            n_antecedent = sum(1 for r in rows if rule.antecedent <= r)
            n_both = sum(1 for r in rows if rule.antecedent <= r and rule.consequent in r)
            assert n_antecedent == n_both

    def test_no_content_itemsets_no_rules(self):
        rows = [frozenset({"activity_0", "arousal_5"})] * 5
        assert apriori_rules(apriori_frequent(rows, 0.1), 0.1) == []

    def test_matches_rule_oracle(self):
        gen = np.random.default_rng(7)
        for _ in range(40):
            rows = random_db(gen, with_content=True)
            frequent = brute_force_frequent(rows, 0.2)
            expected = brute_force_rules(frequent, 0.5)
            got = apriori_rules(apriori_frequent(rows, 0.2), 0.5)
            assert [(r.antecedent, r.consequent, r.support, r.confidence) for r in got] == expected

    def test_monotone_in_min_confidence(self):
        gen = np.random.default_rng(21)
        rows = random_db(gen, n_tx=12, with_content=True)
        frequent = apriori_frequent(rows, 0.1)
        previous = None
        for mc in (0.2, 0.5, 0.8, 1.0):
            keys = {(r.antecedent, r.consequent) for r in apriori_rules(frequent, mc)}
            if previous is not None:
                assert keys <= previous
            previous = keys

    def test_stored_measures_recompute_from_db(self):
        gen = np.random.default_rng(17)
        rows = random_db(gen, n_tx=12, with_content=True)
        n = len(rows)
        for rule in apriori_rules(apriori_frequent(rows, 0.1), 0.3):
            both = frozenset(rule.antecedent | {rule.consequent})
            support = sum(1 for r in rows if both <= r) / n
            antecedent_support = sum(1 for r in rows if rule.antecedent <= r) / n
            assert abs(rule.support - support) <= 1e-12
            assert abs(rule.confidence - support / antecedent_support) <= 1e-12

    def test_rule_validation(self):
        with pytest.raises(DomainError):
            AssociationRule(frozenset({"content_2"}), "content_2", 0.1, 1.0)
        with pytest.raises(DomainError):
            AssociationRule(frozenset({"content_3"}), "content_2", 0.1, 1.0)


class TestSerialization:
    def test_transactions_round_trip(self, tmp_path):
        db = [
            ContextTransaction(
                frozenset({"activity_3", "arousal_7", "valence_2", "content_20"}), 1
            ),
            ContextTransaction(frozenset({"activity_0", "arousal_5", "valence_5"}), 2),
        ]
        path = tmp_path / "transactions.jsonl"
        save_transactions(path, db)
        assert load_transactions(path) == db
        first = json.loads(path.read_text().splitlines()[0])
        assert first["items"] == sorted(first["items"])

    def test_rules_round_trip(self, tmp_path):
        rules = [
            AssociationRule(
                frozenset({"activity_3", "arousal_7"}), "content_20", 0.4, 1.0
            )
        ]
        path = tmp_path / "rules.jsonl"
        save_rules(path, rules)
        assert load_rules(path) == rules
