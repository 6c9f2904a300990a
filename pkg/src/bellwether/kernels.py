"""Split-search and tree-traversal kernels.

Each kernel exists twice: a loop form compiled with numba and a
vectorized pure-numpy form. `accel.USE_NUMBA` picks which one the
forest uses; both variants stay importable so the benchmark and the
equivalence tests can compare them directly.

Split gains are impurity decreases local to the node (parent impurity
minus size-weighted child impurity); the tree builder rescales them by
node size when accumulating feature importance.
"""

import numpy as np

from .accel import NUMBA_AVAILABLE, USE_NUMBA

# Gains at or below this are treated as no improvement, so constant or
# pure-noise targets never split on float fuzz.
MIN_GAIN = 1e-12


def _split_cls_loop(X, y, feats):
    n = X.shape[0]
    cum_all = 0.0
    for i in range(n):
        cum_all += y[i]
    p = cum_all / n
    parent = 1.0 - p * p - (1.0 - p) * (1.0 - p)
    best_feat = -1
    best_thr = 0.0
    best_gain = MIN_GAIN
    for fi in range(feats.shape[0]):
        f = feats[fi]
        order = np.argsort(X[:, f])
        cum = 0.0
        for i in range(n - 1):
            cum += y[order[i]]
            xi = X[order[i], f]
            xj = X[order[i + 1], f]
            if xi == xj:
                continue
            nl = i + 1.0
            nr = n - nl
            pl = cum / nl
            pr = (cum_all - cum) / nr
            gl = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl)
            gr = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr)
            gain = parent - (nl * gl + nr * gr) / n
            if gain > best_gain:
                best_gain = gain
                best_feat = f
                best_thr = 0.5 * (xi + xj)
    return best_feat, best_thr, best_gain


def _split_reg_loop(X, y, feats):
    n = X.shape[0]
    s_all = 0.0
    s2_all = 0.0
    for i in range(n):
        s_all += y[i]
        s2_all += y[i] * y[i]
    mu = s_all / n
    parent = s2_all / n - mu * mu
    best_feat = -1
    best_thr = 0.0
    best_gain = MIN_GAIN
    for fi in range(feats.shape[0]):
        f = feats[fi]
        order = np.argsort(X[:, f])
        s = 0.0
        s2 = 0.0
        for i in range(n - 1):
            yi = y[order[i]]
            s += yi
            s2 += yi * yi
            xi = X[order[i], f]
            xj = X[order[i + 1], f]
            if xi == xj:
                continue
            nl = i + 1.0
            nr = n - nl
            ml = s / nl
            mr = (s_all - s) / nr
            vl = s2 / nl - ml * ml
            vr = (s2_all - s2) / nr - mr * mr
            gain = parent - (nl * vl + nr * vr) / n
            if gain > best_gain:
                best_gain = gain
                best_feat = f
                best_thr = 0.5 * (xi + xj)
    return best_feat, best_thr, best_gain


def _traverse_loop(feature, threshold, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


def split_cls_numpy(X, y, feats):
    n = X.shape[0]
    cum_all = float(np.cumsum(y)[-1])
    p = cum_all / n
    parent = 1.0 - p * p - (1.0 - p) * (1.0 - p)
    best_feat, best_thr, best_gain = -1, 0.0, MIN_GAIN
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    for f in feats:
        order = np.argsort(X[:, f])
        xs = X[order, f]
        cum = np.cumsum(y[order])[:-1]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        pl = cum / nl
        pr = (cum_all - cum) / nr
        gl = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl)
        gr = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr)
        gain = parent - (nl * gl + nr * gr) / n
        gain[~valid] = -np.inf
        j = int(np.argmax(gain))
        if gain[j] > best_gain:
            best_gain = float(gain[j])
            best_feat = int(f)
            best_thr = 0.5 * (xs[j] + xs[j + 1])
    return best_feat, best_thr, best_gain


def split_reg_numpy(X, y, feats):
    n = X.shape[0]
    cs = np.cumsum(y)
    cs2 = np.cumsum(y * y)
    s_all, s2_all = float(cs[-1]), float(cs2[-1])
    mu = s_all / n
    parent = s2_all / n - mu * mu
    best_feat, best_thr, best_gain = -1, 0.0, MIN_GAIN
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    for f in feats:
        order = np.argsort(X[:, f])
        xs = X[order, f]
        yo = y[order]
        s = np.cumsum(yo)[:-1]
        s2 = np.cumsum(yo * yo)[:-1]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        ml = s / nl
        mr = (s_all - s) / nr
        vl = s2 / nl - ml * ml
        vr = (s2_all - s2) / nr - mr * mr
        gain = parent - (nl * vl + nr * vr) / n
        gain[~valid] = -np.inf
        j = int(np.argmax(gain))
        if gain[j] > best_gain:
            best_gain = float(gain[j])
            best_feat = int(f)
            best_thr = 0.5 * (xs[j] + xs[j + 1])
    return best_feat, best_thr, best_gain


def traverse_numpy(feature, threshold, left, right, value, X):
    n = X.shape[0]
    idx = np.zeros(n, dtype=np.int64)
    while True:
        active = feature[idx] >= 0
        if not active.any():
            break
        rows = np.flatnonzero(active)
        cur = idx[rows]
        go_left = X[rows, feature[cur]] <= threshold[cur]
        idx[rows] = np.where(go_left, left[cur], right[cur])
    return value[idx]


if NUMBA_AVAILABLE:
    from numba import njit

    split_cls_numba = njit(cache=True)(_split_cls_loop)
    split_reg_numba = njit(cache=True)(_split_reg_loop)
    traverse_numba = njit(cache=True)(_traverse_loop)
else:  # pragma: no cover
    split_cls_numba = None
    split_reg_numba = None
    traverse_numba = None

if USE_NUMBA:
    split_cls = split_cls_numba
    split_reg = split_reg_numba
    traverse = traverse_numba
else:
    split_cls = split_cls_numpy
    split_reg = split_reg_numpy
    traverse = traverse_numpy
