"""Independent brute-force oracles the implementation is checked against.

These deliberately avoid the library's own code paths: frequent itemsets
come from powerset enumeration, best repair paths from exhaustive DFS over
every content/state sequence, and report metrics from scratch formulas.
"""

from __future__ import annotations

from itertools import combinations


def brute_force_frequent(rows, min_support):
    """Powerset enumeration over the item universe of the database."""
    universe = sorted({item for row in rows for item in row})
    n = len(rows)
    out = {}
    for k in range(1, len(universe) + 1):
        for combo in combinations(universe, k):
            needle = set(combo)
            count = sum(1 for row in rows if needle <= set(row))
            support = count / n
            if support >= min_support:
                out[frozenset(combo)] = support
    return out


def brute_force_rules(frequent, min_confidence, content_prefix="content_"):
    """Re-derive antecedent -> content rules straight from the support map."""
    rules = []
    for itemset, support in frequent.items():
        contents = sorted(i for i in itemset if i.startswith(content_prefix))
        if len(contents) != 1:
            continue
        antecedent = frozenset(i for i in itemset if not i.startswith(content_prefix))
        if not antecedent:
            continue
        confidence = support / frequent[antecedent]
        if confidence >= min_confidence:
            rules.append((antecedent, contents[0], support, confidence))
    rules.sort(key=lambda r: (sorted(r[0]), r[1]))
    return rules


def enumerate_best_path(logp, start, target_mask, horizon):
    """Exhaustive DFS over all content/state sequences of length 1..horizon.

    Log likelihoods accumulate left to right.  Returns (value, path) for
    the best path into a target state under (max value, lexicographically
    smallest step sequence), or None when no target is reachable.
    """
    n_states = logp.shape[0]
    n_contents = logp.shape[1]
    neg_inf = float("-inf")
    best = None

    def dfs(state, depth, value, path):
        nonlocal best
        if depth > 0 and target_mask[state]:
            if (
                best is None
                or value > best[0]
                or (value == best[0] and path < best[1])
            ):
                best = (value, list(path))
        if depth == horizon:
            return
        for c in range(n_contents):
            for s2 in range(n_states):
                v = value + logp[state, c, s2]
                if v == neg_inf:
                    continue
                path.append((c, s2))
                dfs(s2, depth + 1, v, path)
                path.pop()

    dfs(start, 0, 0.0, [])
    return best


def binary_report_oracle(pairs, positive):
    """Scratch precision/recall/F1 for one class of a binary pair list."""
    tp = sum(1 for t, p in pairs if t == positive and p == positive)
    fp = sum(1 for t, p in pairs if t != positive and p == positive)
    fn = sum(1 for t, p in pairs if t == positive and p != positive)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1, tp + fn
