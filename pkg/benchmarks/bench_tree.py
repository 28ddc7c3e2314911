"""Tree-kernel benchmark: numba backend vs the pure-numpy twin.

Times build_tree and predict_forest on identical data and checks that the
two backends agree. The first numba call pays JIT compilation, so both
backends get a warm-up round before timing.

Run from the repo root:
    python3 benchmarks/bench_tree.py [--n 20000] [--d 5] [--trees 50]
"""

import argparse
import time

import numpy as np

from cfconformal._accel import tree_numpy

try:
    from cfconformal._accel import tree_numba
except ImportError:
    tree_numba = None


def fit_forest(mod, X, y, n_trees, max_depth, lr):
    """Boosting loop shared by both backends: residual refit per tree."""
    resid = y.copy()
    parts = []
    for _ in range(n_trees):
        tree = mod.build_tree(X, resid, max_depth)
        pred = mod.predict_tree(*tree, X)
        resid = resid - lr * pred
        parts.append(tree)
    features = np.stack([t[0] for t in parts])
    thresholds = np.stack([t[1] for t in parts])
    lefts = np.stack([t[2] for t in parts])
    rights = np.stack([t[3] for t in parts])
    values = np.stack([t[4] for t in parts])
    return features, thresholds, lefts, rights, values


def bench(mod, X, y, Xq, n_trees, max_depth, lr, repeats):
    forest = fit_forest(mod, X[:200], y[:200], 3, max_depth, lr)  # warm-up
    mod.predict_forest(*forest, Xq[:50])

    t0 = time.perf_counter()
    for _ in range(repeats):
        forest = fit_forest(mod, X, y, n_trees, max_depth, lr)
    t_fit = (time.perf_counter() - t0) / repeats

    t0 = time.perf_counter()
    for _ in range(repeats):
        pred = mod.predict_forest(*forest, Xq)
    t_pred = (time.perf_counter() - t0) / repeats
    return t_fit, t_pred, pred


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--d", type=int, default=5)
    ap.add_argument("--trees", type=int, default=50)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    X = rng.normal(size=(args.n, args.d))
    y = np.sin(X[:, 0]) + 0.5 * X[:, 1 % args.d] + 0.1 * rng.normal(size=args.n)
    Xq = rng.normal(size=(5000, args.d))

    print(f"n={args.n} d={args.d} trees={args.trees} depth={args.depth} "
          f"(mean of {args.repeats} runs)")
    np_fit, np_pred, np_out = bench(tree_numpy, X, y, Xq, args.trees,
                                    args.depth, 0.1, args.repeats)
    print(f"numpy  fit {np_fit * 1e3:9.1f} ms   predict {np_pred * 1e3:7.1f} ms")
    if tree_numba is None:
        print("numba  not importable, skipped")
        return
    nb_fit, nb_pred, nb_out = bench(tree_numba, X, y, Xq, args.trees,
                                    args.depth, 0.1, args.repeats)
    print(f"numba  fit {nb_fit * 1e3:9.1f} ms   predict {nb_pred * 1e3:7.1f} ms")
    print(f"speedup: fit {np_fit / nb_fit:.1f}x, predict {np_pred / nb_pred:.1f}x")
    ok = np.allclose(np_out, nb_out, rtol=0, atol=0)
    print("backends agree bit for bit" if ok
          else f"BACKENDS DISAGREE, max abs diff {np.max(np.abs(np_out - nb_out)):.3e}")


if __name__ == "__main__":
    main()
