"""Per-driver transition model and maximum-likelihood repair planning.

The model tallies (state, content, next state) observations from the
driver's lifelog; conditionals are Laplace-smoothed so unseen pairs stay
plannable.  Planning searches content/state paths up to a horizon for the
most likely route into a target affective region.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .domain import AffectiveState
from .errors import DomainError
from .mining import AssociationRule

TargetPredicate = Callable[[AffectiveState], bool]


def _band(x: int) -> int:
    return 2 if x <= 3 else (5 if x <= 6 else 8)


@dataclass(frozen=True)
class StateSpace:
    """Canonically ordered affect states the model conditions over.

    The default is the full 9x9 plane; ``coarse_grid`` buckets each axis
    into bands 1-3, 4-6, 7-9 to keep desk-scale tables dense.  Custom
    state tuples are allowed (projection is then the identity and states
    outside the space are rejected).
    """

    states: tuple[AffectiveState, ...] = tuple(
        AffectiveState(v, a) for v in range(1, 10) for a in range(1, 10)
    )
    grid: int = 9  # 9 full, 3 coarse, 0 custom

    def __post_init__(self):
        if len(set(self.states)) != len(self.states) or not self.states:
            raise DomainError("state space must be non-empty and duplicate-free")
        if tuple(sorted(self.states)) != self.states:
            raise DomainError("state space must be in canonical (valence, arousal) order")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    @classmethod
    def full_grid(cls) -> "StateSpace":
        return cls()

    @classmethod
    def coarse_grid(cls) -> "StateSpace":
        states = tuple(AffectiveState(v, a) for v in (2, 5, 8) for a in (2, 5, 8))
        return cls(states=states, grid=3)

    @classmethod
    def custom(cls, states) -> "StateSpace":
        return cls(states=tuple(sorted(states)), grid=0)

    @classmethod
    def from_grid(cls, grid: int) -> "StateSpace":
        if grid == 9:
            return cls.full_grid()
        if grid == 3:
            return cls.coarse_grid()
        raise DomainError(f"grid must be 3 or 9, got {grid}")

    def project(self, state: AffectiveState) -> AffectiveState:
        if self.grid == 3:
            return AffectiveState(_band(state.valence), _band(state.arousal))
        if state not in self._index:
            raise DomainError(f"state {state} outside this state space")
        return state

    def index(self, state: AffectiveState) -> int:
        return self._index[self.project(state)]


def min_valence_target(min_valence: int = 6) -> TargetPredicate:
    """Default repair target: positive-polarity states (valence >= 6)."""
    return lambda state: state.valence >= min_valence


@dataclass
class TransitionModel:
    """Smoothed conditional P(next | content, current) over a state space."""

    alpha: float = 1.0
    space: StateSpace = field(default_factory=StateSpace)
    contents: tuple[int, ...] = ()
    counts: dict[tuple[int, int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.alpha <= 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        self.contents = tuple(sorted(set(self.contents)))

    def observe(self, state: AffectiveState, content: int, next_state: AffectiveState) -> None:
        key = (self.space.index(state), int(content), self.space.index(next_state))
        self.counts[key] = self.counts.get(key, 0) + 1
        if content not in self.contents:
            self.contents = tuple(sorted(set(self.contents) | {int(content)}))

    def _row(self, s_idx: int, content: int) -> np.ndarray:
        n = len(self.space.states)
        row = np.full(n, self.alpha)
        for s2 in range(n):
            row[s2] += self.counts.get((s_idx, content, s2), 0)
        return row / row.sum()

    def prob(self, state: AffectiveState, content: int, next_state: AffectiveState) -> float:
        row = self._row(self.space.index(state), int(content))
        return float(row[self.space.index(next_state)])

    def log_tensor(self, contents: Sequence[int]) -> np.ndarray:
        """log P(next | content, current) as (S, C, S), contents as given."""
        n = len(self.space.states)
        out = np.empty((n, len(contents), n))
        for ci, content in enumerate(contents):
            for s_idx in range(n):
                out[s_idx, ci, :] = np.log(self._row(s_idx, int(content)))
        return out

    def digest(self) -> str:
        payload = json.dumps(
            {
                "alpha": self.alpha,
                "grid": self.space.grid,
                "contents": list(self.contents),
                "counts": sorted((list(k), v) for k, v in self.counts.items()),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def save_tsv(self, path: str | Path) -> None:
        states = self.space.states
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("s\tc\ts_next\tcount\n")
            for (si, c, sj), count in sorted(self.counts.items()):
                s, s2 = states[si], states[sj]
                fh.write(f"{s.valence},{s.arousal}\t{c}\t{s2.valence},{s2.arousal}\t{count}\n")

    @classmethod
    def load_tsv(
        cls,
        path: str | Path,
        alpha: float = 1.0,
        space: StateSpace | None = None,
        contents: Iterable[int] = (),
    ) -> "TransitionModel":
        space = space or StateSpace()
        model = cls(alpha=alpha, space=space, contents=tuple(contents))
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().split("\t")
            if header != ["s", "c", "s_next", "count"]:
                raise DomainError(f"unexpected model header {header}")
            for line in fh:
                if not line.strip():
                    continue
                s_txt, c_txt, s2_txt, n_txt = line.rstrip("\n").split("\t")
                v1, a1 = (int(x) for x in s_txt.split(","))
                v2, a2 = (int(x) for x in s2_txt.split(","))
                key = (
                    space.index(AffectiveState(v1, a1)),
                    int(c_txt),
                    space.index(AffectiveState(v2, a2)),
                )
                model.counts[key] = model.counts.get(key, 0) + int(n_txt)
                if int(c_txt) not in model.contents:
                    model.contents = tuple(sorted(set(model.contents) | {int(c_txt)}))
        return model


def learn_transitions(
    history: Iterable[tuple[AffectiveState, int, AffectiveState]],
    alpha: float = 1.0,
    space: StateSpace | None = None,
    contents: Iterable[int] = (),
) -> TransitionModel:
    """Tally lifelog (state, content, next state) triples into a model."""
    model = TransitionModel(alpha=alpha, space=space or StateSpace(), contents=tuple(contents))
    for state, content, next_state in history:
        model.observe(state, content, next_state)
    return model


@dataclass(frozen=True)
class RepairPlan:
    contents: tuple[int, ...]
    predicted_states: tuple[AffectiveState, ...]
    log_likelihood: float

    def __post_init__(self):
        if len(self.contents) != len(self.predicted_states):
            raise DomainError("plan lists must have equal length")

    def to_dict(self) -> dict:
        return {
            "contents": list(self.contents),
            "predicted_states": [[s.valence, s.arousal] for s in self.predicted_states],
            "log_likelihood": self.log_likelihood,
        }


def plan_repair(
    model: TransitionModel,
    start: AffectiveState,
    target: TargetPredicate,
    horizon: int = 5,
    candidates: Sequence[int] = (),
) -> RepairPlan | None:
    """Most likely content sequence of length <= horizon into the target.

    Content choice is a per-step decision variable, maximized jointly with
    the state path.  Ties break to the lowest content id, then the lowest
    state index.  Returns an empty plan when the start already satisfies
    the target and None when no path reaches it within the horizon.
    """
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    if not candidates:
        raise DomainError("candidate content set is empty")
    start_p = model.space.project(start)
    if target(start_p):
        return RepairPlan((), (), 0.0)

    cand_sorted = sorted(set(int(c) for c in candidates))
    states = model.space.states
    mask = np.array([1 if target(s) else 0 for s in states], dtype=np.uint8)
    if not mask.any():
        return None
    logp = model.log_tensor(cand_sorted)
    hit = _kernels.viterbi_path(logp, model.space.index(start_p), mask, horizon)
    if hit is None:
        return None
    value, steps = hit
    return RepairPlan(
        contents=tuple(cand_sorted[c] for c, _ in steps),
        predicted_states=tuple(states[s] for _, s in steps),
        log_likelihood=float(value),
    )


def candidate_contents(
    rules: Sequence[AssociationRule],
    context_items: frozenset[str] | set[str],
    catalog_ids: Sequence[int],
) -> list[int]:
    """Contents whose rule antecedent is contained in the context.

    Ordered by confidence descending, support descending, id ascending;
    falls back to the whole catalog when nothing matches.
    """
    items = frozenset(context_items)
    matched = [r for r in rules if r.antecedent <= items]
    matched.sort(key=lambda r: (-r.confidence, -r.support, r.content_id))
    ordered: list[int] = []
    for rule in matched:
        if rule.content_id not in ordered:
            ordered.append(rule.content_id)
    return ordered if ordered else sorted(catalog_ids)
