"""Vectorized numpy implementation of the regression-tree kernels.

Kept semantically interchangeable with the numba twin: identical split
rule (squared-error reduction, strict improvement, first best position,
feature-ascending scan), identical stable sorts, and node totals taken
from sequential cumulative sums so gains match the loop arithmetic of
the compiled path bit for bit on tie-free data.
"""

import numpy as np


def build_tree(X, y, max_depth, min_leaf=1):
    """Fit one depth-limited least-squares tree.

    Returns (feature, threshold, left, right, value) arrays of length
    2**(max_depth+1) - 1; feature == -1 marks a leaf.
    """
    n, d = X.shape
    max_nodes = 2 ** (max_depth + 1) - 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes)

    idx = np.arange(n, dtype=np.int64)
    stack = [(0, 0, n, 0)]
    next_free = 1
    while stack:
        node, start, end, depth = stack.pop()
        rows = idx[start:end]
        ysub = y[rows]
        m = end - start
        # cumsum is sequential, unlike pairwise np.sum
        total = float(np.cumsum(ysub)[-1])
        value[node] = total / m
        if depth >= max_depth or m < 2 * min_leaf:
            continue
        base = total * total / m
        best_gain = base
        best_f = -1
        best_k = -1
        best_thr = 0.0
        for f in range(d):
            xs = X[rows, f]
            order = np.argsort(xs, kind="stable")
            xs_sorted = xs[order]
            pref = np.cumsum(ysub[order])
            ks = np.arange(1, m)
            ls = pref[:-1]
            rs = total - ls
            gains = ls * ls / ks + rs * rs / (m - ks)
            valid = xs_sorted[:-1] < xs_sorted[1:]
            if min_leaf > 1:
                valid &= (ks >= min_leaf) & (ks <= m - min_leaf)
            if not valid.any():
                continue
            gains = np.where(valid, gains, -np.inf)
            j = int(np.argmax(gains))
            g = float(gains[j])
            if g > best_gain:
                best_gain = g
                best_f = f
                best_k = j + 1
                thr = 0.5 * (xs_sorted[j] + xs_sorted[j + 1])
                # adjacent floats: midpoint may round up to the right value
                if thr >= xs_sorted[j + 1]:
                    thr = xs_sorted[j]
                best_thr = thr
        if best_f < 0:
            continue
        # stable partition: original order preserved on both sides
        mask = X[rows, best_f] <= best_thr
        idx[start:end] = np.concatenate((rows[mask], rows[~mask]))
        lo, hi = next_free, next_free + 1
        next_free += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lo
        right[node] = hi
        split = start + best_k
        stack.append((hi, split, end, depth + 1))
        stack.append((lo, start, split, depth + 1))
    return feature, threshold, left, right, value


def predict_tree(feature, threshold, left, right, value, X):
    """Evaluate one tree on a batch of rows."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    rows = np.arange(n)
    for _ in range(feature.shape[0]):
        internal = feature[node] >= 0
        if not internal.any():
            break
        f = np.where(internal, feature[node], 0)
        fx = X[rows, f]
        go_left = fx <= threshold[node]
        nxt = np.where(go_left, left[node], right[node])
        node = np.where(internal, nxt, node)
    return value[node]


def predict_forest(features, thresholds, lefts, rights, values, X):
    """Sum of per-tree predictions for a packed ensemble (no shrinkage)."""
    out = np.zeros(X.shape[0])
    for t in range(features.shape[0]):
        out += predict_tree(
            features[t], thresholds[t], lefts[t], rights[t], values[t], X
        )
    return out
