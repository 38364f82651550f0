"""Compiled CART growth and traversal.

Samples are held in one presorted index array per feature; every node owns
the same contiguous segment ``[start, end)`` of all of them, and a split
stably partitions each segment so the sort order never has to be rebuilt.
Sample weights are integer multiplicities (bootstrap counts), so weighted
statistics equal those of the duplicated resample.
"""

import numpy as np
from numba import njit

LEAF = -1

# relative margin under which two split gains count as tied
_TIE_RTOL = 1e-12


@njit(cache=True, nogil=True)
def _segment_stats(y, w, idx, start, end):
    wsum = 0.0
    s = 0.0
    ymin = np.inf
    ymax = -np.inf
    for k in range(start, end):
        i = idx[k]
        wsum += w[i]
        s += w[i] * y[i]
        if y[i] < ymin:
            ymin = y[i]
        if y[i] > ymax:
            ymax = y[i]
    mean = s / wsum
    sse = 0.0
    for k in range(start, end):
        i = idx[k]
        d = y[i] - mean
        sse += w[i] * d * d
    return wsum, s, mean, sse, ymin == ymax


@njit(cache=True, nogil=True)
def _best_split(X, y, w, order, start, end, wsum, s, min_leaf, features):
    best_gain = 0.0
    best_feat = -1
    best_thr = 0.0
    best_pos = 0
    for f in features:
        seg = order[f]
        wl = 0.0
        sl = 0.0
        for k in range(start, end - 1):
            i = seg[k]
            wl += w[i]
            sl += w[i] * y[i]
            a = X[i, f]
            b = X[seg[k + 1], f]
            if not b > a:
                continue
            wr = wsum - wl
            if wl < min_leaf or wr < min_leaf:
                continue
            sr = s - sl
            diff = sl / wl - sr / wr
            gain = wl * wr / wsum * diff * diff
            if gain > best_gain * (1.0 + _TIE_RTOL) and gain > 0.0:
                best_gain = gain
                best_feat = f
                thr = 0.5 * (a + b)
                # midpoint can round up to b for adjacent floats
                if thr >= b:
                    thr = a
                best_thr = thr
                best_pos = k + 1 - start
    return best_feat, best_thr, best_gain, best_pos


@njit(cache=True, nogil=True)
def _choose_features(n_features, n_sub):
    feats = np.arange(n_features)
    if n_sub >= n_features:
        return feats
    for j in range(n_sub):
        r = j + np.random.randint(n_features - j)
        tmp = feats[j]
        feats[j] = feats[r]
        feats[r] = tmp
    return np.sort(feats[:n_sub])


@njit(cache=True, nogil=True)
def grow_tree(X, y, w, max_depth, min_samples_leaf, max_leaves, leafwise,
              n_sub_features, seed):
    """Grow one regression tree.

    Returns ``(feature, threshold, left, right, value, weight, impurity)``
    node arrays; ``feature == -1`` marks a leaf. ``max_depth`` and
    ``max_leaves`` of 0 mean unbounded.
    """
    n, n_features = X.shape
    if n_sub_features < n_features:
        np.random.seed(seed)

    active = np.nonzero(w > 0)[0]
    m = active.shape[0]
    order = np.empty((n_features, m), dtype=np.int64)
    for f in range(n_features):
        col = X[active, f]
        order[f] = active[np.argsort(col, kind="mergesort")]

    cap = 2 * m + 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, dtype=np.int64)
    right = np.full(cap, LEAF, dtype=np.int64)
    value = np.zeros(cap)
    weight = np.zeros(cap)
    impurity = np.zeros(cap)
    depth = np.zeros(cap, dtype=np.int64)
    seg_start = np.zeros(cap, dtype=np.int64)
    seg_end = np.zeros(cap, dtype=np.int64)
    node_sum = np.zeros(cap)
    cand_feat = np.full(cap, LEAF, dtype=np.int64)
    cand_thr = np.zeros(cap)
    cand_gain = np.zeros(cap)
    cand_pos = np.zeros(cap, dtype=np.int64)

    is_left = np.zeros(n, dtype=np.bool_)
    buf = np.empty(m, dtype=np.int64)
    frontier = np.empty(cap, dtype=np.int64)
    head = 0
    tail = 0

    n_nodes = 1
    seg_start[0] = 0
    seg_end[0] = m
    n_leaves = 1

    # evaluate root, then loop: each created node gets its candidate split
    pending = np.empty(2, dtype=np.int64)
    pending[0] = 0
    n_pending = 1
    while True:
        for p in range(n_pending):
            node = pending[p]
            st = seg_start[node]
            en = seg_end[node]
            wsum, s, mean, sse, pure = _segment_stats(y, w, order[0], st, en)
            value[node] = mean
            weight[node] = wsum
            impurity[node] = sse
            node_sum[node] = s
            if pure or wsum < 2 * min_samples_leaf:
                continue
            if max_depth > 0 and depth[node] >= max_depth:
                continue
            feats = _choose_features(n_features, n_sub_features)
            bf, bt, bg, bp = _best_split(X, y, w, order, st, en, wsum, s,
                                         min_samples_leaf, feats)
            if bf >= 0:
                cand_feat[node] = bf
                cand_thr[node] = bt
                cand_gain[node] = bg
                cand_pos[node] = bp
                frontier[tail] = node
                tail += 1
        n_pending = 0

        if head == tail:
            break
        if max_leaves > 0 and n_leaves >= max_leaves:
            break

        if leafwise:
            pick = head
            for q in range(head + 1, tail):
                if cand_gain[frontier[q]] > cand_gain[frontier[pick]] * (1.0 + _TIE_RTOL):
                    pick = q
            node = frontier[pick]
            # keep creation order among the remaining candidates
            for q in range(pick, head, -1):
                frontier[q] = frontier[q - 1]
            head += 1
        else:
            node = frontier[head]
            head += 1

        f = cand_feat[node]
        st = seg_start[node]
        en = seg_end[node]
        mid = st + cand_pos[node]
        for k in range(st, en):
            is_left[order[f, k]] = k < mid
        for g in range(n_features):
            if g == f:
                continue
            seg = order[g]
            nl = 0
            nr = 0
            for k in range(st, en):
                i = seg[k]
                if is_left[i]:
                    seg[st + nl] = i
                    nl += 1
                else:
                    buf[nr] = i
                    nr += 1
            for r in range(nr):
                seg[mid + r] = buf[r]

        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        feature[node] = f
        threshold[node] = cand_thr[node]
        left[node] = lc
        right[node] = rc
        seg_start[lc] = st
        seg_end[lc] = mid
        seg_start[rc] = mid
        seg_end[rc] = en
        depth[lc] = depth[node] + 1
        depth[rc] = depth[node] + 1
        n_leaves += 1
        pending[0] = lc
        pending[1] = rc
        n_pending = 2

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(),
            value[:n_nodes].copy(), weight[:n_nodes].copy(),
            impurity[:n_nodes].copy())


@njit(cache=True, nogil=True)
def apply_tree(feature, threshold, left, right, value, X):
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        node = 0
        while feature[node] != LEAF:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = value[node]
    return out
