"""Pure-NumPy implementations of the hot numeric kernels.

Every public function here has a jit-compiled twin in ``numba_backend``.
The two backends must stay behaviourally identical; the test suite asserts
bitwise-equal outputs. To keep float results identical, sums that the jit
path accumulates in a scalar loop are computed here with ``cumsum`` (same
left-to-right order), and gain formulas are written with the exact same
operation shapes.

Trees are built over presorted column order: ``order`` is an
(n_features, n) int32 array whose row f holds row indices sorted by
feature f (stable sort). The builder materialises per-feature permuted
arrays (row id, value, class, weight, count) once per tree and partitions
them in place level by level, so no re-sorting ever happens inside a node.
Bootstrap resampling is expressed as a per-row multiplicity vector
``mult``; rows with mult == 0 are dropped up front, which is equivalent to
scanning a materialised resample.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_MIX1 = 0xBF58476D1CE4E5B9
_SM64_MIX2 = 0x94D049BB133111EB


def _splitmix64(state: int) -> tuple[int, int]:
    # SplitMix64 step; plain Python ints masked to 64 bits so the numpy
    # backend never trips unsigned-overflow warnings.
    state = (state + _SM64_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * _SM64_MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM64_MIX2) & _MASK64
    return state, z ^ (z >> 31)


def _feature_subset(state: int, n_features: int, n_sub: int) -> tuple[int, list[int]]:
    # Partial Fisher-Yates, then ascending order so the scan loop keeps the
    # lower-feature-index tie rule.
    pool = list(range(n_features))
    for j in range(n_sub):
        state, z = _splitmix64(state)
        r = j + int(z % (n_features - j))
        pool[j], pool[r] = pool[r], pool[j]
    return state, sorted(pool[:n_sub])


def _midpoint(lo: float, hi: float) -> float:
    # midpoint of two adjacent distinct values; if rounding lands on the
    # upper value the split would leave one side empty, so fall back to
    # the lower value ("<= goes left" keeps both children non-empty)
    thr = 0.5 * (lo + hi)
    return lo if thr >= hi else thr


def _gini_best(vv, yy, ww, cc, min_samples_leaf, tw0, tw1, tcnt):
    # vv/yy/ww/cc hold one node's rows in ascending feature order
    m = vv.shape[0]
    if m < 2:
        return -1.0, 0.0
    yf = yy.astype(np.float64)
    cw0 = np.cumsum(ww * (1.0 - yf))
    cw1 = np.cumsum(ww * yf)
    ccnt = np.cumsum(cc.astype(np.int64))

    tw = tw0 + tw1
    q0 = tw0 / tw
    q1 = tw1 / tw
    parent = 1.0 - (q0 * q0 + q1 * q1)

    cl = ccnt[:-1]
    ok = (vv[:-1] < vv[1:]) & (cl >= min_samples_leaf) & (tcnt - cl >= min_samples_leaf)
    if not ok.any():
        return -1.0, 0.0
    wl = cw0[:-1] + cw1[:-1]
    wr = tw - wl
    with np.errstate(divide="ignore", invalid="ignore"):
        l0 = cw0[:-1] / wl
        l1 = cw1[:-1] / wl
        r0 = (tw0 - cw0[:-1]) / wr
        r1 = (tw1 - cw1[:-1]) / wr
        dec = parent - (wl / tw) * (1.0 - (l0 * l0 + l1 * l1)) \
                     - (wr / tw) * (1.0 - (r0 * r0 + r1 * r1))
    dec[~ok] = -np.inf
    i = int(np.argmax(dec))          # first occurrence of the max
    return float(dec[i]), _midpoint(float(vv[i]), float(vv[i + 1]))


def gini_scan(xt, order, f, start, end, y01, w, mult, min_samples_leaf,
              tot_w0, tot_w1, tot_cnt):
    """Best weighted-Gini split of one feature over one node.

    Rows order[f, start:end] are in ascending feature order; rows with
    mult == 0 take no part. Returns (decrease, threshold); decrease of -1.0
    means no admissible split exists on this feature. A zero decrease is a
    real candidate: an impure node may split without lowering the weighted
    impurity when only a deeper split separates the classes.
    """
    rows = order[f, start:end]
    mm = mult[rows]
    act = mm > 0
    sel = rows[act]
    return _gini_best(xt[f, sel], y01[sel], w[sel] * mm[act],
                      mm[act], min_samples_leaf, tot_w0, tot_w1, tot_cnt)


def _gbt_best(vv, gg, hh, l2_leaf, tot_g, tot_h):
    m = vv.shape[0]
    if m < 2:
        return 0.0, 0.0
    cg = np.cumsum(gg)
    ch = np.cumsum(hh)
    ok = vv[:-1] < vv[1:]
    if not ok.any():
        return 0.0, 0.0
    parent = tot_g * tot_g / (tot_h + l2_leaf)
    gl = cg[:-1]
    hl = ch[:-1]
    gr = tot_g - gl
    hr = tot_h - hl
    gain = 0.5 * (gl * gl / (hl + l2_leaf) + gr * gr / (hr + l2_leaf) - parent)
    gain[~ok] = -np.inf
    i = int(np.argmax(gain))
    if not gain[i] > 0.0:
        return 0.0, 0.0
    return float(gain[i]), _midpoint(float(vv[i]), float(vv[i + 1]))


def gbt_scan(xt, order, f, start, end, grad, hess, l2_leaf, tot_g, tot_h):
    """Best second-order-gain split of one feature over one node.

    Returns (gain, threshold); gain of 0.0 means no admissible split.
    """
    rows = order[f, start:end]
    return _gbt_best(xt[f, rows], grad[rows], hess[rows], l2_leaf, tot_g, tot_h)


def build_gini_tree(xt, y01, w, mult, order, max_depth, min_samples_split,
                    min_samples_leaf, n_sub_features, seed):
    """Grow one CART tree; returns flat node arrays.

    max_depth < 0 means unlimited. Nodes are numbered in creation order
    (root 0, children assigned at split time); traversal is depth-first,
    left child first. Returns (feature, threshold, left, right, w0, w1,
    n_nodes); leaves have feature == -1 and carry the weighted class sums.
    """
    n_features, n = xt.shape
    keep = mult > 0
    n_act = int(np.count_nonzero(keep))
    rid = np.empty((n_features, n_act), np.int32)
    vv = np.empty((n_features, n_act), np.float64)
    yy = np.empty((n_features, n_act), np.uint8)
    ww = np.empty((n_features, n_act), np.float64)
    cc = np.empty((n_features, n_act), np.int32)
    for f in range(n_features):
        sel = order[f][keep[order[f]]]
        rid[f] = sel
        vv[f] = xt[f, sel]
        yy[f] = y01[sel]
        ww[f] = w[sel] * mult[sel]
        cc[f] = mult[sel]

    cap = 2 * n_act + 1
    feature = np.full(cap, -1, np.int32)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    node_w0 = np.zeros(cap, np.float64)
    node_w1 = np.zeros(cap, np.float64)

    state = int(seed) & _MASK64
    stack = [(0, n_act, 0, 0)]
    n_nodes = 1
    while stack:
        start, end, depth, node = stack.pop()
        yf = yy[0, start:end].astype(np.float64)
        wseg = ww[0, start:end]
        tw0 = float(np.cumsum(wseg * (1.0 - yf))[-1])
        tw1 = float(np.cumsum(wseg * yf)[-1])
        tcnt = int(cc[0, start:end].sum())
        node_w0[node] = tw0
        node_w1[node] = tw1

        stop = tcnt < min_samples_split or tw0 == 0.0 or tw1 == 0.0
        if 0 <= max_depth <= depth:
            stop = True

        # -0.5 sits between the -1.0 no-candidate sentinel and any real
        # decrease (>= 0 up to rounding), so zero-decrease splits are taken
        best_f, best_dec, best_thr = -1, -0.5, 0.0
        if not stop:
            if n_sub_features < n_features:
                state, feats = _feature_subset(state, n_features, n_sub_features)
            else:
                feats = range(n_features)
            for f in feats:
                dec, thr = _gini_best(vv[f, start:end], yy[f, start:end],
                                      ww[f, start:end], cc[f, start:end],
                                      min_samples_leaf, tw0, tw1, tcnt)
                if dec > best_dec:
                    best_f, best_dec, best_thr = f, dec, thr
        if best_f < 0:
            continue

        feature[node] = best_f
        threshold[node] = best_thr
        lid, rid_node = n_nodes, n_nodes + 1
        n_nodes += 2
        left[node] = lid
        right[node] = rid_node

        go_left = np.zeros(n, bool)
        go_left[rid[best_f, start:end]] = vv[best_f, start:end] <= best_thr
        n_left = 0
        for f in range(n_features):
            mask = go_left[rid[f, start:end]]
            n_left = int(np.count_nonzero(mask))
            for arr in (rid, vv, yy, ww, cc):
                seg = arr[f, start:end]
                lpart, rpart = seg[mask], seg[~mask]
                arr[f, start:start + n_left] = lpart
                arr[f, start + n_left:end] = rpart
        stack.append((start + n_left, end, depth + 1, rid_node))
        stack.append((start, start + n_left, depth + 1, lid))
    return feature, threshold, left, right, node_w0, node_w1, n_nodes


def build_gbt_tree(xt, grad, hess, order, max_depth, min_child_weight, l2_leaf):
    """Grow one boosting tree on gradients/hessians; returns flat node arrays.

    Leaf value is -sum(g) / (sum(h) + l2_leaf). Returns (feature, threshold,
    left, right, value, n_nodes).
    """
    n_features, n = xt.shape
    rid = np.empty((n_features, n), np.int32)
    vv = np.empty((n_features, n), np.float64)
    gg = np.empty((n_features, n), np.float64)
    hh = np.empty((n_features, n), np.float64)
    for f in range(n_features):
        sel = order[f]
        rid[f] = sel
        vv[f] = xt[f, sel]
        gg[f] = grad[sel]
        hh[f] = hess[sel]

    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int32)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    value = np.zeros(cap, np.float64)

    stack = [(0, n, 0, 0)]
    n_nodes = 1
    while stack:
        start, end, depth, node = stack.pop()
        tg = float(np.cumsum(gg[0, start:end])[-1])
        th = float(np.cumsum(hh[0, start:end])[-1])
        value[node] = -tg / (th + l2_leaf)

        m = end - start
        stop = m < 2 or th < min_child_weight
        if 0 <= max_depth <= depth:
            stop = True

        best_f, best_gain, best_thr = -1, 0.0, 0.0
        if not stop:
            for f in range(n_features):
                gain, thr = _gbt_best(vv[f, start:end], gg[f, start:end],
                                      hh[f, start:end], l2_leaf, tg, th)
                if gain > best_gain:
                    best_f, best_gain, best_thr = f, gain, thr
        if best_f < 0:
            continue

        feature[node] = best_f
        threshold[node] = best_thr
        lid, rid_node = n_nodes, n_nodes + 1
        n_nodes += 2
        left[node] = lid
        right[node] = rid_node

        go_left = np.zeros(n, bool)
        go_left[rid[best_f, start:end]] = vv[best_f, start:end] <= best_thr
        n_left = 0
        for f in range(n_features):
            mask = go_left[rid[f, start:end]]
            n_left = int(np.count_nonzero(mask))
            for arr in (rid, vv, gg, hh):
                seg = arr[f, start:end]
                lpart, rpart = seg[mask], seg[~mask]
                arr[f, start:start + n_left] = lpart
                arr[f, start + n_left:end] = rpart
        stack.append((start + n_left, end, depth + 1, rid_node))
        stack.append((start, start + n_left, depth + 1, lid))
    return feature, threshold, left, right, value, n_nodes


def apply_tree(feature, threshold, left, right, x):
    """Leaf index reached by each row of x (row-major n x n_features)."""
    n = x.shape[0]
    cur = np.zeros(n, np.int32)
    while True:
        feat = feature[cur]
        alive = np.nonzero(feat >= 0)[0]
        if alive.size == 0:
            return cur
        nodes = cur[alive]
        go_left = x[alive, feat[alive]] <= threshold[nodes]
        cur[alive] = np.where(go_left, left[nodes], right[nodes])


def knn_brute(p, k):
    """Indices of the k nearest rows to each row of p (self excluded).

    Euclidean distance; ties broken by lower row index. Returns an
    (n, k) int32 array ordered nearest first.
    """
    m, n_feat = p.shape
    out = np.empty((m, k), np.int32)
    block = max(1, min(m, 4_000_000 // max(m, 1)))
    for s0 in range(0, m, block):
        s1 = min(m, s0 + block)
        d2 = np.zeros((s1 - s0, m), np.float64)
        for f in range(n_feat):
            diff = p[s0:s1, f, None] - p[None, :, f]
            d2 += diff * diff
        d2[np.arange(s1 - s0), np.arange(s0, s1)] = np.inf
        # stable sort on distance: equal distances keep index order
        ordr = np.argsort(d2, axis=1, kind="stable")
        out[s0:s1] = ordr[:, :k].astype(np.int32)
    return out
