"""Numba-compiled regression-tree kernels.

Mirror of the numpy twin: same split rule, same stable sorts, same
sequential accumulation order, so the two backends agree bit for bit on
tie-free data.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def build_tree(X, y, max_depth, min_leaf=1):
    n, d = X.shape
    max_nodes = 2 ** (max_depth + 1) - 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes)

    idx = np.arange(n)
    buf = np.empty(n, dtype=np.int64)
    stack_node = np.empty(max_nodes, dtype=np.int64)
    stack_start = np.empty(max_nodes, dtype=np.int64)
    stack_end = np.empty(max_nodes, dtype=np.int64)
    stack_depth = np.empty(max_nodes, dtype=np.int64)
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n
    stack_depth[0] = 0
    top = 1
    next_free = 1

    xs = np.empty(n)
    ys = np.empty(n)
    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        m = end - start
        total = 0.0
        for i in range(start, end):
            total += y[idx[i]]
        value[node] = total / m
        if depth >= max_depth or m < 2 * min_leaf:
            continue
        base = total * total / m
        best_gain = base
        best_f = -1
        best_k = -1
        best_thr = 0.0
        for i in range(m):
            ys[i] = y[idx[start + i]]
        for f in range(d):
            for i in range(m):
                xs[i] = X[idx[start + i], f]
            order = np.argsort(xs[:m], kind="mergesort")
            left_sum = 0.0
            for kk in range(m - 1):
                o = order[kk]
                left_sum += ys[o]
                o_next = order[kk + 1]
                if xs[o] < xs[o_next]:
                    k = kk + 1
                    if k < min_leaf or m - k < min_leaf:
                        continue
                    rs = total - left_sum
                    g = left_sum * left_sum / k + rs * rs / (m - k)
                    if g > best_gain:
                        best_gain = g
                        best_f = f
                        best_k = k
                        thr = 0.5 * (xs[o] + xs[o_next])
                        # adjacent floats: midpoint may round up to the right value
                        if thr >= xs[o_next]:
                            thr = xs[o]
                        best_thr = thr
        if best_f < 0:
            continue
        # stable partition: original order preserved on both sides
        nl = 0
        nr = 0
        for i in range(start, end):
            r = idx[i]
            if X[r, best_f] <= best_thr:
                buf[start + nl] = r
                nl += 1
            else:
                buf[end - 1 - nr] = r  # reversed; fixed below
                nr += 1
        for i in range(nl):
            idx[start + i] = buf[start + i]
        for i in range(nr):
            idx[start + nl + i] = buf[end - 1 - i]
        lo = next_free
        hi = next_free + 1
        next_free += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lo
        right[node] = hi
        split = start + best_k
        stack_node[top] = hi
        stack_start[top] = split
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = lo
        stack_start[top] = start
        stack_end[top] = split
        stack_depth[top] = depth + 1
        top += 1
    return feature, threshold, left, right, value


@njit(cache=True)
def predict_tree(feature, threshold, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@njit(cache=True)
def predict_forest(features, thresholds, lefts, rights, values, X):
    n = X.shape[0]
    n_trees = features.shape[0]
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for t in range(n_trees):
            node = 0
            while features[t, node] >= 0:
                if X[i, features[t, node]] <= thresholds[t, node]:
                    node = lefts[t, node]
                else:
                    node = rights[t, node]
            acc += values[t, node]
        out[i] = acc
    return out
