# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Semantics are defined by ``_pykernels.py``; keep in lockstep."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

NAME = "cython"


def run_plant(
    const double[:, ::1] feed,
    const double[::1] tank1_cap,
    const double[::1] proc1_cap,
    const double[::1] tank2_cap,
    const double[::1] pump_cap,
    const double[::1] proc2_cap,
    const double[:, ::1] fail_u,
    double fail_prob,
    const double[::1] alpha,
    const unsigned char[::1] pause,
    long initial_spares,
    long min_level,
    long reorder_qty,
    long lead_time,
    long repair_with,
    long repair_without,
):
    cdef Py_ssize_t n_trains = feed.shape[0]
    cdef Py_ssize_t horizon = feed.shape[1]
    cdef Py_ssize_t t, k
    cdef double[:, ::1] flares = np.zeros((n_trains, 2), dtype=np.float64)
    cdef double[:, ::1] levels = np.zeros((n_trains, 2), dtype=np.float64)
    cdef double[::1] rec = np.zeros(n_trains, dtype=np.float64)
    cdef double[::1] pcap = np.empty(n_trains, dtype=np.float64)
    cdef long[::1] down = np.zeros(n_trains, dtype=np.int_)
    cdef double product = 0.0, level, level2, p1, flow, r, a, recycle = 0.0
    cdef long spares = initial_spares, procured = initial_spares
    cdef long arrival = -1, failures = 0, downtime = 0
    cdef unsigned char paused

    for k in range(n_trains):
        pcap[k] = pump_cap[k] if pump_cap[k] < proc2_cap[k] else proc2_cap[k]

    with nogil:
        for t in range(horizon):
            if arrival >= 0 and t >= arrival:
                spares += reorder_qty
                procured += reorder_qty
                arrival = -1
            a = alpha[t]
            paused = pause[t]
            for k in range(n_trains):
                level = levels[k, 0] + feed[k, t] + rec[k]
                rec[k] = 0.0
                p1 = proc1_cap[k] if proc1_cap[k] < level else level
                level -= p1
                if level > tank1_cap[k]:
                    flares[k, 0] += level - tank1_cap[k]
                    level = tank1_cap[k]
                levels[k, 0] = level

                level2 = levels[k, 1] + p1
                if down[k] == 0 and fail_u[k, t] < fail_prob:
                    failures += 1
                    if spares > 0:
                        spares -= 1
                        down[k] = repair_with
                    else:
                        down[k] = repair_without
                if down[k] > 0:
                    down[k] -= 1
                    downtime += 1
                    flow = 0.0
                elif paused:
                    flow = 0.0
                else:
                    flow = pcap[k] if pcap[k] < level2 else level2
                level2 -= flow
                if level2 > tank2_cap[k]:
                    flares[k, 1] += level2 - tank2_cap[k]
                    level2 = tank2_cap[k]
                levels[k, 1] = level2

                r = a * flow
                product += flow - r
                rec[k] = r
            if arrival < 0 and spares < min_level:
                arrival = t + lead_time

    for k in range(n_trains):
        recycle += rec[k]
    return (product, np.asarray(flares), np.asarray(levels), recycle,
            procured, failures, downtime)


cdef inline uint64_t _splitmix(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


def build_tree(
    const double[:, ::1] X,
    const double[::1] y,
    const double[::1] yc,
    const int64_t[:, ::1] order,
    long max_features,
    long min_samples_split,
    long min_samples_leaf,
    object seed,
):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t cap = 2 * n - 1 if n > 0 else 1
    cdef int64_t[:, ::1] S = np.array(order, dtype=np.int64, copy=True)
    cdef int64_t[::1] feature = np.full(cap, -1, dtype=np.int64)
    cdef double[::1] threshold = np.zeros(cap, dtype=np.float64)
    cdef int64_t[::1] left = np.full(cap, -1, dtype=np.int64)
    cdef int64_t[::1] right = np.full(cap, -1, dtype=np.int64)
    cdef double[::1] value = np.zeros(cap, dtype=np.float64)
    cdef unsigned char[::1] goes_left = np.zeros(n, dtype=np.uint8)
    cdef int64_t[::1] buf = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] perm = np.empty(d, dtype=np.int64)
    cdef unsigned char[::1] chosen = np.zeros(d, dtype=np.uint8)
    # explicit DFS stack: (node, start, end)
    cdef int64_t[:, ::1] stack = np.empty((cap + 1, 3), dtype=np.int64)
    cdef Py_ssize_t sp = 0, n_nodes = 1
    cdef Py_ssize_t node, start, end, m, i, j, jj, c, kk, best_pos, n_left, li, ri
    cdef long k = max_features if max_features < d else d
    cdef uint64_t seed64 = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t state, rnd
    cdef int64_t tmp, best_f, s
    cdef double y0, acc, total, sumsq, parent, best, sl, sr, nl, nr, proxy, a, b, thr, v
    cdef bint pure

    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    sp = 1
    with nogil:
        while sp > 0:
            sp -= 1
            node = stack[sp, 0]
            start = stack[sp, 1]
            end = stack[sp, 2]
            m = end - start

            y0 = y[S[0, start]]
            acc = 0.0
            pure = True
            for i in range(start, end):
                v = y[S[0, i]]
                acc += v - y0
                if v != y0:
                    pure = False
            value[node] = y0 + acc / m
            if m < min_samples_split or pure:
                continue

            total = 0.0
            sumsq = 0.0
            for i in range(start, end):
                v = yc[S[0, i]]
                total += v
                sumsq += v * v
            parent = total * total / m

            # candidate features: partial Fisher-Yates, then ascending order
            for j in range(d):
                perm[j] = j
                chosen[j] = 0
            if k < d:
                state = seed64 ^ (<uint64_t>(node + 1) * <uint64_t>0xD1B54A32D192ED03ULL)
                for i in range(k):
                    rnd = _splitmix(&state)
                    jj = i + <Py_ssize_t>(rnd % <uint64_t>(d - i))
                    tmp = perm[i]
                    perm[i] = perm[jj]
                    perm[jj] = tmp
                for i in range(k):
                    chosen[perm[i]] = 1
            else:
                for j in range(d):
                    chosen[j] = 1

            best = -1.0 / 0.0
            best_f = -1
            best_pos = -1
            for j in range(d):
                if not chosen[j]:
                    continue
                sl = 0.0
                for i in range(start, end - 1):
                    c = i - start
                    sl += yc[S[j, i]]
                    nl = <double>(c + 1)
                    nr = <double>(m - c - 1)
                    if nl < min_samples_leaf or nr < min_samples_leaf:
                        continue
                    if X[S[j, i], j] == X[S[j, i + 1], j]:
                        continue
                    sr = total - sl
                    proxy = sl * sl / nl + sr * sr / nr
                    if proxy > best:
                        best = proxy
                        best_f = j
                        best_pos = c
            if best_f < 0 or not (best > parent + 1e-12 * sumsq):
                continue

            a = X[S[best_f, start + best_pos], best_f]
            b = X[S[best_f, start + best_pos + 1], best_f]
            thr = (a + b) * 0.5
            if thr <= a:
                thr = b
            n_left = best_pos + 1
            for i in range(start, start + n_left):
                goes_left[S[best_f, i]] = 1
            for j in range(d):
                li = 0
                for i in range(start, end):
                    s = S[j, i]
                    if goes_left[s]:
                        S[j, start + li] = s
                        li += 1
                    else:
                        buf[i - start - li] = s
                ri = end - start - li
                for i in range(ri):
                    S[j, start + li + i] = buf[i]
            for i in range(start, start + n_left):
                goes_left[S[best_f, i]] = 0

            feature[node] = best_f
            threshold[node] = thr
            left[node] = n_nodes
            right[node] = n_nodes + 1
            stack[sp, 0] = n_nodes + 1
            stack[sp, 1] = start + n_left
            stack[sp, 2] = end
            sp += 1
            stack[sp, 0] = n_nodes
            stack[sp, 1] = start
            stack[sp, 2] = start + n_left
            sp += 1
            n_nodes += 2

    return (
        np.asarray(feature)[:n_nodes].copy(),
        np.asarray(threshold)[:n_nodes].copy(),
        np.asarray(left)[:n_nodes].copy(),
        np.asarray(right)[:n_nodes].copy(),
        np.asarray(value)[:n_nodes].copy(),
    )


def predict_forest(
    const int64_t[::1] feature,
    const double[::1] threshold,
    const int64_t[::1] left,
    const int64_t[::1] right,
    const double[::1] value,
    const int64_t[::1] roots,
    const double[:, ::1] X,
):
    cdef Py_ssize_t n = X.shape[0], n_trees = roots.shape[0]
    cdef Py_ssize_t i, t
    cdef int64_t node
    cdef double p0, acc
    cdef double[::1] out = np.empty(n, dtype=np.float64)
    with nogil:
        for i in range(n):
            node = roots[0]
            while feature[node] >= 0:
                node = left[node] if X[i, feature[node]] < threshold[node] else right[node]
            p0 = value[node]
            acc = 0.0
            for t in range(1, n_trees):
                node = roots[t]
                while feature[node] >= 0:
                    node = left[node] if X[i, feature[node]] < threshold[node] else right[node]
                acc += value[node] - p0
            out[i] = p0 + acc / n_trees
    return np.asarray(out)


def nds_ranks(const double[:, ::1] G):
    cdef Py_ssize_t n = G.shape[0], m = G.shape[1]
    cdef Py_ssize_t p, q, j, f, i_front
    cdef unsigned char[:, ::1] dom = np.zeros((n, n), dtype=np.uint8)
    cdef int64_t[::1] count = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] rank = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] front = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] nxt = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t n_front = 0, n_next
    cdef bint ge_pq, gt_pq, ge_qp, gt_qp
    cdef long i = 1

    with nogil:
        for p in range(n):
            for q in range(p + 1, n):
                ge_pq = True
                gt_pq = False
                ge_qp = True
                gt_qp = False
                for j in range(m):
                    if G[p, j] < G[q, j]:
                        ge_pq = False
                        gt_qp = True
                    elif G[p, j] > G[q, j]:
                        ge_qp = False
                        gt_pq = True
                if ge_pq and gt_pq:
                    dom[p, q] = 1
                    count[q] += 1
                elif ge_qp and gt_qp:
                    dom[q, p] = 1
                    count[p] += 1
        for p in range(n):
            if count[p] == 0:
                rank[p] = 1
                front[n_front] = p
                n_front += 1
        while n_front > 0:
            n_next = 0
            for f in range(n_front):
                p = front[f]
                for q in range(n):
                    if dom[p, q]:
                        count[q] -= 1
                        if count[q] == 0:
                            rank[q] = i + 1
                            nxt[n_next] = q
                            n_next += 1
            i += 1
            for f in range(n_next):
                front[f] = nxt[f]
            n_front = n_next
    return np.asarray(rank)
