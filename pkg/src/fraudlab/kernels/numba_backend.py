"""Jit-compiled implementations of the hot numeric kernels.

Behavioural twin of ``numpy_backend``; see that module for the contract.
Scalar accumulations here run left to right over the same sequences the
numpy path feeds to ``cumsum``, and gain/decrease formulas use the exact
same operation shapes, so outputs are bitwise identical across backends.

Tree builders carry permuted per-feature arrays (value, class, weight,
count) through the level-by-level partitions, so split scans touch memory
sequentially; the only random access left is the one per-row flag lookup
during partitioning.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_MIX2 = np.uint64(0x94D049BB133111EB)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)


@njit(cache=True, nogil=True)
def _gini_best(vv, yy, ww, cc, start, end, min_samples_leaf, tw0, tw1, tcnt):
    # vv/yy/ww/cc hold the node's rows in ascending feature order;
    # ww is the per-row weight already multiplied by its bootstrap count
    tw = tw0 + tw1
    q0 = tw0 / tw
    q1 = tw1 / tw
    parent = 1.0 - (q0 * q0 + q1 * q1)
    # -0.5 marks "nothing yet"; any admissible decrease (>= 0 up to
    # rounding) beats it, so zero-decrease candidates are kept
    best_dec = -0.5
    best_thr = 0.0
    cw0 = 0.0
    cw1 = 0.0
    ccnt = 0
    prev_v = vv[start]
    for i in range(start, end):
        v = vv[i]
        if v > prev_v:
            if ccnt >= min_samples_leaf and tcnt - ccnt >= min_samples_leaf:
                wl = cw0 + cw1
                wr = tw - wl
                l0 = cw0 / wl
                l1 = cw1 / wl
                r0 = (tw0 - cw0) / wr
                r1 = (tw1 - cw1) / wr
                dec = parent - (wl / tw) * (1.0 - (l0 * l0 + l1 * l1)) \
                             - (wr / tw) * (1.0 - (r0 * r0 + r1 * r1))
                if dec > best_dec:
                    best_dec = dec
                    # if the midpoint rounds up to v the right side would
                    # come out empty, so fall back to the lower value
                    thr = 0.5 * (prev_v + v)
                    best_thr = prev_v if thr >= v else thr
            prev_v = v
        if yy[i] == 1:
            cw1 += ww[i]
        else:
            cw0 += ww[i]
        ccnt += cc[i]
    if best_dec == -0.5:
        return -1.0, 0.0
    return best_dec, best_thr


@njit(cache=True, nogil=True)
def _gini_core(v, rows, y01, w, mult, min_samples_leaf, tot_w0, tot_w1, tot_cnt):
    # row-indexed variant used by the standalone scan entry point
    tw = tot_w0 + tot_w1
    q0 = tot_w0 / tw
    q1 = tot_w1 / tw
    parent = 1.0 - (q0 * q0 + q1 * q1)
    best_dec = -0.5
    best_thr = 0.0
    cw0 = 0.0
    cw1 = 0.0
    ccnt = 0
    prev_v = 0.0
    seen = False
    for i in range(v.shape[0]):
        r = rows[i]
        mr = mult[r]
        if mr == 0:
            continue
        vv = v[i]
        if seen and vv > prev_v:
            if ccnt >= min_samples_leaf and tot_cnt - ccnt >= min_samples_leaf:
                wl = cw0 + cw1
                wr = tw - wl
                l0 = cw0 / wl
                l1 = cw1 / wl
                r0 = (tot_w0 - cw0) / wr
                r1 = (tot_w1 - cw1) / wr
                dec = parent - (wl / tw) * (1.0 - (l0 * l0 + l1 * l1)) \
                             - (wr / tw) * (1.0 - (r0 * r0 + r1 * r1))
                if dec > best_dec:
                    best_dec = dec
                    thr = 0.5 * (prev_v + vv)
                    best_thr = prev_v if thr >= vv else thr
        wmr = w[r] * mr
        if y01[r] == 1:
            cw1 += wmr
        else:
            cw0 += wmr
        ccnt += mr
        prev_v = vv
        seen = True
    if best_dec == -0.5:
        return -1.0, 0.0
    return best_dec, best_thr


@njit(cache=True, nogil=True)
def gini_scan(xt, order, f, start, end, y01, w, mult, min_samples_leaf,
              tot_w0, tot_w1, tot_cnt):
    v = np.empty(end - start, np.float64)
    for i in range(start, end):
        v[i - start] = xt[f, order[f, i]]
    return _gini_core(v, order[f, start:end], y01, w, mult,
                      min_samples_leaf, tot_w0, tot_w1, tot_cnt)


@njit(cache=True, nogil=True)
def _gbt_best(vv, gg, hh, start, end, l2_leaf, tot_g, tot_h):
    parent = tot_g * tot_g / (tot_h + l2_leaf)
    best_gain = 0.0
    best_thr = 0.0
    cg = 0.0
    ch = 0.0
    prev_v = vv[start]
    for i in range(start, end):
        v = vv[i]
        if v > prev_v:
            gl = cg
            hl = ch
            gr = tot_g - gl
            hr = tot_h - hl
            gain = 0.5 * (gl * gl / (hl + l2_leaf) + gr * gr / (hr + l2_leaf) - parent)
            if gain > best_gain:
                best_gain = gain
                thr = 0.5 * (prev_v + v)
                best_thr = prev_v if thr >= v else thr
            prev_v = v
        cg += gg[i]
        ch += hh[i]
    return best_gain, best_thr


@njit(cache=True, nogil=True)
def _gbt_core(v, rows, grad, hess, l2_leaf, tot_g, tot_h):
    parent = tot_g * tot_g / (tot_h + l2_leaf)
    best_gain = 0.0
    best_thr = 0.0
    cg = 0.0
    ch = 0.0
    prev_v = 0.0
    seen = False
    for i in range(v.shape[0]):
        vv = v[i]
        if seen and vv > prev_v:
            gl = cg
            hl = ch
            gr = tot_g - gl
            hr = tot_h - hl
            gain = 0.5 * (gl * gl / (hl + l2_leaf) + gr * gr / (hr + l2_leaf) - parent)
            if gain > best_gain:
                best_gain = gain
                thr = 0.5 * (prev_v + vv)
                best_thr = prev_v if thr >= vv else thr
        r = rows[i]
        cg += grad[r]
        ch += hess[r]
        prev_v = vv
        seen = True
    return best_gain, best_thr


@njit(cache=True, nogil=True)
def gbt_scan(xt, order, f, start, end, grad, hess, l2_leaf, tot_g, tot_h):
    v = np.empty(end - start, np.float64)
    for i in range(start, end):
        v[i - start] = xt[f, order[f, i]]
    return _gbt_core(v, order[f, start:end], grad, hess, l2_leaf, tot_g, tot_h)


@njit(cache=True, nogil=True)
def _grow_i32(arr, newcap, fill):
    out = np.full(newcap, fill, np.int32)
    out[:arr.shape[0]] = arr
    return out


@njit(cache=True, nogil=True)
def _grow_f64(arr, newcap):
    out = np.zeros(newcap, np.float64)
    out[:arr.shape[0]] = arr
    return out


@njit(cache=True, nogil=True)
def build_gini_tree(xt, y01, w, mult, order, max_depth, min_samples_split,
                    min_samples_leaf, n_sub_features, seed):
    n_features, n = xt.shape

    # compress to rows with mult > 0 once; afterwards every row counts
    n_act = 0
    for r in range(n):
        if mult[r] > 0:
            n_act += 1
    rid = np.empty((n_features, n_act), np.int32)
    vv = np.empty((n_features, n_act), np.float64)
    yy = np.empty((n_features, n_act), np.uint8)
    ww = np.empty((n_features, n_act), np.float64)
    cc = np.empty((n_features, n_act), np.int32)
    for f in range(n_features):
        j = 0
        for i in range(n):
            r = order[f, i]
            if mult[r] > 0:
                rid[f, j] = r
                vv[f, j] = xt[f, r]
                yy[f, j] = y01[r]
                ww[f, j] = w[r] * mult[r]
                cc[f, j] = mult[r]
                j += 1

    cap = 1024
    feature = np.full(cap, -1, np.int32)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    node_w0 = np.zeros(cap, np.float64)
    node_w1 = np.zeros(cap, np.float64)

    scap = 1024
    stack = np.empty((scap, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = n_act
    stack[0, 2] = 0
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    # uint64 from the start: mixing a signed seed into the uint64 stream
    # would sign-extend the shifts and desynchronize the draws
    state = np.uint64(seed)
    pool = np.empty(n_features, np.int64)
    feats = np.empty(n_features, np.int64)
    flag = np.empty(n, np.uint8)
    b_rid = np.empty(n_act, np.int32)
    b_vv = np.empty(n_act, np.float64)
    b_yy = np.empty(n_act, np.uint8)
    b_ww = np.empty(n_act, np.float64)
    b_cc = np.empty(n_act, np.int32)

    while top > 0:
        top -= 1
        start = stack[top, 0]
        end = stack[top, 1]
        depth = stack[top, 2]
        node = stack[top, 3]

        tw0 = 0.0
        tw1 = 0.0
        tcnt = 0
        for i in range(start, end):
            if yy[0, i] == 1:
                tw1 += ww[0, i]
            else:
                tw0 += ww[0, i]
            tcnt += cc[0, i]
        node_w0[node] = tw0
        node_w1[node] = tw1

        stop = tcnt < min_samples_split or tw0 == 0.0 or tw1 == 0.0
        if max_depth >= 0 and depth >= max_depth:
            stop = True

        best_f = -1
        # below any admissible decrease yet above the -1.0 sentinel, so
        # zero-decrease splits of an impure node are taken
        best_dec = -0.5
        best_thr = 0.0
        if not stop:
            if n_sub_features < n_features:
                for j in range(n_features):
                    pool[j] = j
                for j in range(n_sub_features):
                    state = state + _SM64_GAMMA
                    z = state
                    z = (z ^ (z >> _U30)) * _SM64_MIX1
                    z = (z ^ (z >> _U27)) * _SM64_MIX2
                    z = z ^ (z >> _U31)
                    rj = j + np.int64(z % np.uint64(n_features - j))
                    tmp = pool[j]
                    pool[j] = pool[rj]
                    pool[rj] = tmp
                # ascending order keeps the lower-feature-index tie rule
                for a in range(1, n_sub_features):
                    key = pool[a]
                    b = a - 1
                    while b >= 0 and pool[b] > key:
                        pool[b + 1] = pool[b]
                        b -= 1
                    pool[b + 1] = key
                for j in range(n_sub_features):
                    feats[j] = pool[j]
                nf_scan = n_sub_features
            else:
                for j in range(n_features):
                    feats[j] = j
                nf_scan = n_features
            for jj in range(nf_scan):
                f = feats[jj]
                dec, thr = _gini_best(vv[f], yy[f], ww[f], cc[f], start, end,
                                      min_samples_leaf, tw0, tw1, tcnt)
                if dec > best_dec:
                    best_f = f
                    best_dec = dec
                    best_thr = thr
        if best_f < 0:
            continue

        if n_nodes + 2 > cap:
            cap = cap * 2
            feature = _grow_i32(feature, cap, -1)
            threshold = _grow_f64(threshold, cap)
            left = _grow_i32(left, cap, -1)
            right = _grow_i32(right, cap, -1)
            node_w0 = _grow_f64(node_w0, cap)
            node_w1 = _grow_f64(node_w1, cap)
        feature[node] = best_f
        threshold[node] = best_thr
        lid = n_nodes
        rid_node = n_nodes + 1
        n_nodes += 2
        left[node] = lid
        right[node] = rid_node

        for i in range(start, end):
            if vv[best_f, i] <= best_thr:
                flag[rid[best_f, i]] = 1
            else:
                flag[rid[best_f, i]] = 0
        n_left = 0
        for f in range(n_features):
            nl = 0
            nr = 0
            for i in range(start, end):
                r = rid[f, i]
                if flag[r] == 1:
                    rid[f, start + nl] = r
                    vv[f, start + nl] = vv[f, i]
                    yy[f, start + nl] = yy[f, i]
                    ww[f, start + nl] = ww[f, i]
                    cc[f, start + nl] = cc[f, i]
                    nl += 1
                else:
                    b_rid[nr] = r
                    b_vv[nr] = vv[f, i]
                    b_yy[nr] = yy[f, i]
                    b_ww[nr] = ww[f, i]
                    b_cc[nr] = cc[f, i]
                    nr += 1
            for t in range(nr):
                rid[f, start + nl + t] = b_rid[t]
                vv[f, start + nl + t] = b_vv[t]
                yy[f, start + nl + t] = b_yy[t]
                ww[f, start + nl + t] = b_ww[t]
                cc[f, start + nl + t] = b_cc[t]
            n_left = nl

        if top + 2 > scap:
            scap = scap * 2
            nstack = np.empty((scap, 4), np.int64)
            nstack[:top] = stack[:top]
            stack = nstack
        stack[top, 0] = start + n_left
        stack[top, 1] = end
        stack[top, 2] = depth + 1
        stack[top, 3] = rid_node
        top += 1
        stack[top, 0] = start
        stack[top, 1] = start + n_left
        stack[top, 2] = depth + 1
        stack[top, 3] = lid
        top += 1
    return feature, threshold, left, right, node_w0, node_w1, n_nodes


@njit(cache=True, nogil=True)
def build_gbt_tree(xt, grad, hess, order, max_depth, min_child_weight, l2_leaf):
    n_features, n = xt.shape
    rid = np.empty((n_features, n), np.int32)
    vv = np.empty((n_features, n), np.float64)
    gg = np.empty((n_features, n), np.float64)
    hh = np.empty((n_features, n), np.float64)
    for f in range(n_features):
        for i in range(n):
            r = order[f, i]
            rid[f, i] = r
            vv[f, i] = xt[f, r]
            gg[f, i] = grad[r]
            hh[f, i] = hess[r]

    cap = 1024
    feature = np.full(cap, -1, np.int32)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    value = np.zeros(cap, np.float64)

    scap = 1024
    stack = np.empty((scap, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = n
    stack[0, 2] = 0
    stack[0, 3] = 0
    top = 1
    n_nodes = 1
    flag = np.empty(n, np.uint8)
    b_rid = np.empty(n, np.int32)
    b_vv = np.empty(n, np.float64)
    b_gg = np.empty(n, np.float64)
    b_hh = np.empty(n, np.float64)

    while top > 0:
        top -= 1
        start = stack[top, 0]
        end = stack[top, 1]
        depth = stack[top, 2]
        node = stack[top, 3]

        tg = 0.0
        th = 0.0
        for i in range(start, end):
            tg += gg[0, i]
            th += hh[0, i]
        value[node] = -tg / (th + l2_leaf)

        m = end - start
        stop = m < 2 or th < min_child_weight
        if max_depth >= 0 and depth >= max_depth:
            stop = True

        best_f = -1
        best_gain = 0.0
        best_thr = 0.0
        if not stop:
            for f in range(n_features):
                gain, thr = _gbt_best(vv[f], gg[f], hh[f], start, end,
                                      l2_leaf, tg, th)
                if gain > best_gain:
                    best_f = f
                    best_gain = gain
                    best_thr = thr
        if best_f < 0:
            continue

        if n_nodes + 2 > cap:
            cap = cap * 2
            feature = _grow_i32(feature, cap, -1)
            threshold = _grow_f64(threshold, cap)
            left = _grow_i32(left, cap, -1)
            right = _grow_i32(right, cap, -1)
            value = _grow_f64(value, cap)
        feature[node] = best_f
        threshold[node] = best_thr
        lid = n_nodes
        rid_node = n_nodes + 1
        n_nodes += 2
        left[node] = lid
        right[node] = rid_node

        for i in range(start, end):
            if vv[best_f, i] <= best_thr:
                flag[rid[best_f, i]] = 1
            else:
                flag[rid[best_f, i]] = 0
        n_left = 0
        for f in range(n_features):
            nl = 0
            nr = 0
            for i in range(start, end):
                r = rid[f, i]
                if flag[r] == 1:
                    rid[f, start + nl] = r
                    vv[f, start + nl] = vv[f, i]
                    gg[f, start + nl] = gg[f, i]
                    hh[f, start + nl] = hh[f, i]
                    nl += 1
                else:
                    b_rid[nr] = r
                    b_vv[nr] = vv[f, i]
                    b_gg[nr] = gg[f, i]
                    b_hh[nr] = hh[f, i]
                    nr += 1
            for t in range(nr):
                rid[f, start + nl + t] = b_rid[t]
                vv[f, start + nl + t] = b_vv[t]
                gg[f, start + nl + t] = b_gg[t]
                hh[f, start + nl + t] = b_hh[t]
            n_left = nl

        if top + 2 > scap:
            scap = scap * 2
            nstack = np.empty((scap, 4), np.int64)
            nstack[:top] = stack[:top]
            stack = nstack
        stack[top, 0] = start + n_left
        stack[top, 1] = end
        stack[top, 2] = depth + 1
        stack[top, 3] = rid_node
        top += 1
        stack[top, 0] = start
        stack[top, 1] = start + n_left
        stack[top, 2] = depth + 1
        stack[top, 3] = lid
        top += 1
    return feature, threshold, left, right, value, n_nodes


@njit(cache=True, nogil=True)
def apply_tree(feature, threshold, left, right, x):
    n = x.shape[0]
    cur = np.zeros(n, np.int32)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if x[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        cur[i] = node
    return cur


@njit(cache=True, nogil=True)
def knn_brute(p, k):
    m, n_feat = p.shape
    out = np.empty((m, k), np.int32)
    bd = np.empty(k, np.float64)
    bi = np.empty(k, np.int64)
    for i in range(m):
        cnt = 0
        for j in range(m):
            if j == i:
                continue
            d = 0.0
            for f in range(n_feat):
                diff = p[i, f] - p[j, f]
                d += diff * diff
            if cnt < k:
                pos = cnt
                while pos > 0 and bd[pos - 1] > d:
                    bd[pos] = bd[pos - 1]
                    bi[pos] = bi[pos - 1]
                    pos -= 1
                bd[pos] = d
                bi[pos] = j
                cnt += 1
            elif d < bd[k - 1]:
                # strict comparisons keep the lower-index row on ties
                pos = k - 1
                while pos > 0 and bd[pos - 1] > d:
                    bd[pos] = bd[pos - 1]
                    bi[pos] = bi[pos - 1]
                    pos -= 1
                bd[pos] = d
                bi[pos] = j
        for t in range(k):
            out[i, t] = bi[t]
    return out
