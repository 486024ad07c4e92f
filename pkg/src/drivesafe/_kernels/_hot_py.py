"""Pure-Python/numpy implementations of the hot kernels.

These are the import-time fallback when the compiled extension is not
available.  Both backends must return bit-identical results; ties are
resolved by exact float equality on sums accumulated left to right, so
the arithmetic order here is part of the contract.
"""

from __future__ import annotations

import numpy as np

NEG_INF = float("-inf")


def support_counts(tx_words: np.ndarray, cand_words: np.ndarray) -> np.ndarray:
    """Count, per candidate bitset, the transactions that contain it.

    ``tx_words`` is (n_tx, n_words) uint64, ``cand_words`` (n_cand, n_words)
    uint64; a transaction contains a candidate when cand & tx == cand on
    every word.
    """
    tx = np.ascontiguousarray(tx_words, dtype=np.uint64)
    cands = np.ascontiguousarray(cand_words, dtype=np.uint64)
    out = np.empty(cands.shape[0], dtype=np.int64)
    for j in range(cands.shape[0]):
        c = cands[j]
        out[j] = int(((tx & c) == c).all(axis=1).sum())
    return out


def viterbi_path(logp, start, target, horizon):
    """Best content/state path of length 1..horizon into a target state.

    ``logp`` is (S, C, S): log P(next | content, current).  Returns
    ``(value, [(content_idx, state_idx), ...])`` maximizing the summed log
    probability; ties resolve to the lexicographically smallest step
    sequence (content index first, then state index, shorter prefix
    first).  Returns None when no target state is reachable.
    """
    lp = np.asarray(logp, dtype=np.float64)
    S, C, _ = lp.shape
    tgt = np.asarray(target, dtype=bool)
    if C == 0 or horizon < 1:
        return None

    v_prev = np.full(S, NEG_INF)
    v_prev[start] = 0.0
    paths_prev: list[list[tuple[int, int]] | None] = [None] * S
    paths_prev[start] = []

    best_val = NEG_INF
    best_path: list[tuple[int, int]] | None = None

    for _ in range(horizon):
        # scores[sp, c, s] = v_prev[sp] + logp[sp, c, s]; -inf rows stay -inf
        scores = v_prev[:, None, None] + lp
        v_cur = scores.max(axis=(0, 1))
        paths_cur: list[list[tuple[int, int]] | None] = [None] * S
        for s in range(S):
            top = v_cur[s]
            if top == NEG_INF:
                continue
            ties = np.argwhere(scores[:, :, s] == top)
            # lexicographic minimum: smallest predecessor path, then content
            sp_best = None
            for sp in np.unique(ties[:, 0]):
                sp = int(sp)
                if paths_prev[sp] is None:
                    continue
                if sp_best is None or paths_prev[sp] < paths_prev[sp_best]:
                    sp_best = sp
            c_best = int(ties[ties[:, 0] == sp_best, 1].min())
            paths_cur[s] = paths_prev[sp_best] + [(c_best, s)]
        v_prev, paths_prev = v_cur, paths_cur

        for s in range(S):
            if not tgt[s] or paths_prev[s] is None:
                continue
            cand_val, cand_path = float(v_prev[s]), paths_prev[s]
            if cand_val > best_val or (cand_val == best_val and _lex_less(cand_path, best_path)):
                best_val, best_path = cand_val, cand_path

    if best_path is None:
        return None
    return best_val, [tuple(step) for step in best_path]


def _lex_less(a, b):
    if b is None:
        return True
    return a < b
