# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled hot kernels: itemset support counting and the repair-path search.

Must stay observably identical to ``_hot_py``; sums accumulate left to
right and ties resolve by exact float equality, so both backends produce
the same bytes.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def support_counts(tx_words, cand_words):
    """Count, per candidate bitset, the transactions that contain it."""
    tx = np.ascontiguousarray(tx_words, dtype=np.uint64)
    cands = np.ascontiguousarray(cand_words, dtype=np.uint64)
    cdef cnp.uint64_t[:, ::1] t = tx
    cdef cnp.uint64_t[:, ::1] c = cands
    cdef Py_ssize_t n_tx = t.shape[0]
    cdef Py_ssize_t n_words = t.shape[1]
    cdef Py_ssize_t n_cand = c.shape[0]
    out = np.zeros(n_cand, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef Py_ssize_t i, j, w
    cdef cnp.uint64_t cw
    cdef bint ok
    with nogil:
        for j in range(n_cand):
            for i in range(n_tx):
                ok = True
                for w in range(n_words):
                    cw = c[j, w]
                    if (t[i, w] & cw) != cw:
                        ok = False
                        break
                if ok:
                    o[j] += 1
    return out


cdef int _path_cmp(cnp.int64_t[:, :, ::1] paths, Py_ssize_t a, Py_ssize_t b,
                   Py_ssize_t length) nogil:
    cdef Py_ssize_t i
    for i in range(length):
        if paths[a, i, 0] != paths[b, i, 0]:
            return -1 if paths[a, i, 0] < paths[b, i, 0] else 1
        if paths[a, i, 1] != paths[b, i, 1]:
            return -1 if paths[a, i, 1] < paths[b, i, 1] else 1
    return 0


cdef bint _lex_take(cnp.int64_t[:, :, ::1] cand, Py_ssize_t s, Py_ssize_t cand_len,
                    cnp.int64_t[:, ::1] best, Py_ssize_t best_len) nogil:
    # True when cand[s, :cand_len] sorts before best[:best_len]
    # (pairwise compare, shorter prefix first).
    cdef Py_ssize_t m = cand_len if cand_len < best_len else best_len
    cdef Py_ssize_t i
    for i in range(m):
        if cand[s, i, 0] != best[i, 0]:
            return cand[s, i, 0] < best[i, 0]
        if cand[s, i, 1] != best[i, 1]:
            return cand[s, i, 1] < best[i, 1]
    return cand_len < best_len


def viterbi_path(logp, Py_ssize_t start, target, Py_ssize_t horizon):
    """Best content/state path of length 1..horizon into a target state.

    Same contract as the fallback: returns ``(value, [(content, state), ...])``
    or None when no target state is reachable.
    """
    lp_arr = np.ascontiguousarray(logp, dtype=np.float64)
    cdef cnp.float64_t[:, :, ::1] lp = lp_arr
    cdef Py_ssize_t S = lp.shape[0]
    cdef Py_ssize_t C = lp.shape[1]
    tgt_arr = np.ascontiguousarray(target, dtype=np.uint8)
    cdef cnp.uint8_t[::1] tgt = tgt_arr
    if C == 0 or horizon < 1:
        return None

    cdef double NEG_INF = float("-inf")
    v_prev_arr = np.full(S, NEG_INF)
    v_prev_arr[start] = 0.0
    v_cur_arr = np.full(S, NEG_INF)
    pp_arr = np.zeros((S, horizon, 2), dtype=np.int64)
    pc_arr = np.zeros((S, horizon, 2), dtype=np.int64)
    best_arr = np.zeros((horizon, 2), dtype=np.int64)

    cdef cnp.float64_t[::1] v_prev = v_prev_arr
    cdef cnp.float64_t[::1] v_cur = v_cur_arr
    cdef cnp.int64_t[:, :, ::1] pp = pp_arr
    cdef cnp.int64_t[:, :, ::1] pc = pc_arr
    cdef cnp.int64_t[:, ::1] best_path = best_arr

    cdef double best_val = NEG_INF
    cdef Py_ssize_t best_len = 0
    cdef bint have_best = False

    cdef Py_ssize_t k, s, sp, c, i, sp_best
    cdef cnp.int64_t c_best
    cdef double top, v
    cdef bint ties, take
    cdef cnp.float64_t[::1] v_tmp
    cdef cnp.int64_t[:, :, ::1] p_tmp

    with nogil:
        for k in range(1, horizon + 1):
            for s in range(S):
                top = NEG_INF
                for sp in range(S):
                    if v_prev[sp] == NEG_INF:
                        continue
                    for c in range(C):
                        v = v_prev[sp] + lp[sp, c, s]
                        if v > top:
                            top = v
                v_cur[s] = top
                if top == NEG_INF:
                    continue
                # lexicographically smallest predecessor path among ties,
                # then the smallest tying content for that predecessor
                sp_best = -1
                for sp in range(S):
                    if v_prev[sp] == NEG_INF:
                        continue
                    ties = False
                    for c in range(C):
                        if v_prev[sp] + lp[sp, c, s] == top:
                            ties = True
                            break
                    if not ties:
                        continue
                    if sp_best < 0 or _path_cmp(pp, sp, sp_best, k - 1) < 0:
                        sp_best = sp
                c_best = -1
                for c in range(C):
                    if v_prev[sp_best] + lp[sp_best, c, s] == top:
                        c_best = c
                        break
                for i in range(k - 1):
                    pc[s, i, 0] = pp[sp_best, i, 0]
                    pc[s, i, 1] = pp[sp_best, i, 1]
                pc[s, k - 1, 0] = c_best
                pc[s, k - 1, 1] = s

            for s in range(S):
                if tgt[s] == 0 or v_cur[s] == NEG_INF:
                    continue
                take = False
                if not have_best or v_cur[s] > best_val:
                    take = True
                elif v_cur[s] == best_val:
                    take = _lex_take(pc, s, k, best_path, best_len)
                if take:
                    best_val = v_cur[s]
                    best_len = k
                    have_best = True
                    for i in range(k):
                        best_path[i, 0] = pc[s, i, 0]
                        best_path[i, 1] = pc[s, i, 1]

            v_tmp = v_prev
            v_prev = v_cur
            v_cur = v_tmp
            p_tmp = pp
            pp = pc
            pc = p_tmp

    if not have_best:
        return None
    return float(best_val), [(int(best_path[i, 0]), int(best_path[i, 1]))
                             for i in range(best_len)]
