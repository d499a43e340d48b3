"""Pure-Python kernels.

Reference semantics for ``_ckernels.pyx``. Every floating-point expression is
evaluated in the same order as the compiled version so that both backends
return bit-identical results; keep the two files in lockstep.
"""

from __future__ import annotations

import numpy as np

from ._rng import node_state, splitmix64

NAME = "python"


def run_plant(
    feed,
    tank1_cap,
    proc1_cap,
    tank2_cap,
    pump_cap,
    proc2_cap,
    fail_u,
    fail_prob,
    alpha,
    pause,
    initial_spares,
    min_level,
    reorder_qty,
    lead_time,
    repair_with,
    repair_without,
):
    """Hourly loop over ``n_trains`` tank/process/tank/pump/process trains.

    All trains draw pump replacements from one shared spares pool. A fraction
    ``alpha[t]`` of each train's pumped flow is returned to the head of that
    train's first tank one hour later.
    """
    n_trains, horizon = feed.shape
    feed_l = feed.tolist()
    fail_l = fail_u.tolist()
    alpha_l = alpha.tolist()
    pause_l = pause.tolist()
    t1cap = [float(v) for v in tank1_cap]
    p1cap = [float(v) for v in proc1_cap]
    t2cap = [float(v) for v in tank2_cap]
    pcap = [min(float(a), float(b)) for a, b in zip(pump_cap, proc2_cap)]

    t1 = [0.0] * n_trains
    t2 = [0.0] * n_trains
    rec = [0.0] * n_trains
    fl1 = [0.0] * n_trains
    fl2 = [0.0] * n_trains
    down = [0] * n_trains
    product = 0.0
    spares = int(initial_spares)
    procured = int(initial_spares)
    arrival = -1
    failures = 0
    downtime = 0

    for t in range(horizon):
        if arrival >= 0 and t >= arrival:
            spares += reorder_qty
            procured += reorder_qty
            arrival = -1
        a = alpha_l[t]
        paused = pause_l[t]
        for k in range(n_trains):
            level = t1[k] + feed_l[k][t] + rec[k]
            rec[k] = 0.0
            p1 = p1cap[k] if p1cap[k] < level else level
            level -= p1
            if level > t1cap[k]:
                fl1[k] += level - t1cap[k]
                level = t1cap[k]
            t1[k] = level

            level2 = t2[k] + p1
            if down[k] == 0 and fail_l[k][t] < fail_prob:
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
            if level2 > t2cap[k]:
                fl2[k] += level2 - t2cap[k]
                level2 = t2cap[k]
            t2[k] = level2

            r = a * flow
            product += flow - r
            rec[k] = r
        if arrival < 0 and spares < min_level:
            arrival = t + lead_time

    flares = np.array([fl1, fl2], dtype=np.float64).T.copy()
    levels = np.array([t1, t2], dtype=np.float64).T.copy()
    recycle = 0.0
    for r in rec:
        recycle += r
    return product, flares, levels, recycle, procured, failures, downtime


def _candidates(seed, node, n_features, k):
    if k >= n_features:
        return list(range(n_features))
    state = node_state(seed, node)
    perm = list(range(n_features))
    for i in range(k):
        state, r = splitmix64(state)
        j = i + r % (n_features - i)
        perm[i], perm[j] = perm[j], perm[i]
    return sorted(perm[:k])


def build_tree(X, y, yc, order, max_features, min_samples_split, min_samples_leaf, seed):
    """Grow one CART regression tree.

    ``order`` is the (n_features, n) matrix of stable per-feature argsorts;
    ``yc`` the globally centred targets used for the split criterion. Returns
    flat node arrays (feature, threshold, left, right, value); ``feature == -1``
    marks a leaf.
    """
    n, d = X.shape
    S = np.array(order, dtype=np.int64, copy=True)
    cap = max(2 * n - 1, 1)
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap, dtype=np.float64)
    goes_left = np.zeros(n, dtype=bool)
    k = min(int(max_features), d)
    seed = int(seed)

    n_nodes = 1
    stack = [(0, 0, n)]
    while stack:
        node, start, end = stack.pop()
        m = end - start
        seg0 = S[0, start:end]
        ys = y[seg0]
        y0 = ys[0]
        value[node] = y0 + np.cumsum(ys - y0)[-1] / m
        if m < min_samples_split or np.all(ys == y0):
            continue

        ycs = yc[seg0]
        total = np.cumsum(ycs)[-1]
        sumsq = np.cumsum(ycs * ycs)[-1]
        parent = total * total / m
        nl = np.arange(1, m, dtype=np.float64)
        nr = m - nl
        size_ok = (nl >= min_samples_leaf) & (nr >= min_samples_leaf)

        best = -np.inf
        best_f = -1
        best_pos = -1
        for j in _candidates(seed, node, d, k):
            seg = S[j, start:end]
            xs = X[seg, j]
            sl = np.cumsum(yc[seg])[:-1]
            sr = total - sl
            proxy = sl * sl / nl + sr * sr / nr
            valid = size_ok & (xs[:-1] != xs[1:])
            if not valid.any():
                continue
            proxy = np.where(valid, proxy, -np.inf)
            pos = int(np.argmax(proxy))
            if proxy[pos] > best:
                best = proxy[pos]
                best_f = j
                best_pos = pos
        if best_f < 0 or not best > parent + 1e-12 * sumsq:
            continue

        seg = S[best_f, start:end]
        a = X[seg[best_pos], best_f]
        b = X[seg[best_pos + 1], best_f]
        thr = (a + b) * 0.5
        if thr <= a:
            thr = b
        n_left = best_pos + 1
        goes_left[seg[:n_left]] = True
        for j in range(d):
            s = S[j, start:end]
            mask = goes_left[s]
            S[j, start:end] = np.concatenate((s[mask], s[~mask]))
        goes_left[seg[:n_left]] = False

        lid, rid = n_nodes, n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = thr
        left[node] = lid
        right[node] = rid
        stack.append((rid, start + n_left, end))
        stack.append((lid, start, start + n_left))

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
    )


def _route(feature, threshold, left, right, roots, X, tree):
    node = np.full(X.shape[0], roots[tree], dtype=np.int64)
    active = np.flatnonzero(feature[node] >= 0)
    while active.size:
        nd = node[active]
        go_left = X[active, feature[nd]] < threshold[nd]
        node[active] = np.where(go_left, left[nd], right[nd])
        active = active[feature[node[active]] >= 0]
    return node


def predict_forest(feature, threshold, left, right, value, roots, X):
    """Mean over trees of packed forest predictions, computed as p0 + sum(p_t - p0)/T."""
    n_trees = roots.shape[0]
    p0 = value[_route(feature, threshold, left, right, roots, X, 0)]
    acc = np.zeros(X.shape[0], dtype=np.float64)
    for t in range(1, n_trees):
        acc += value[_route(feature, threshold, left, right, roots, X, t)] - p0
    return p0 + acc / n_trees


def nds_ranks(G):
    """Front rank (1-based) of every row of ``G``; larger is better in every column."""
    n = G.shape[0]
    dominates = (G[:, None, :] >= G[None, :, :]).all(-1) & (G[:, None, :] > G[None, :, :]).any(-1)
    count = dominates.sum(axis=0)
    rank = np.zeros(n, dtype=np.int64)
    front = np.flatnonzero(count == 0)
    i = 1
    rank[front] = i
    while front.size:
        count = count - dominates[front].sum(axis=0)
        nxt = np.flatnonzero((count == 0) & (rank == 0))
        i += 1
        rank[nxt] = i
        front = nxt
    return rank
