"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run: python3 benchmarks/bench_kernels.py [--rows 2000] [--attrs 20]
"""

import argparse
import time

import numpy as np

from bellwether import ForestParams, TaskKind, train_forest
from bellwether.data import ProjectDataset
from bellwether import kernels


def time_fn(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_splits(rows, attrs):
    rng = np.random.default_rng(0)
    X = rng.random((rows, attrs))
    y_cls = (rng.random(rows) > 0.6).astype(np.float64)
    y_reg = rng.normal(size=rows)
    feats = np.arange(attrs, dtype=np.int64)
    variants = [
        ("split_cls", kernels.split_cls_numba, kernels.split_cls_numpy, y_cls),
        ("split_reg", kernels.split_reg_numba, kernels.split_reg_numpy, y_reg),
    ]
    for name, numba_fn, numpy_fn, y in variants:
        if numba_fn is None:
            print(f"{name}: numba unavailable")
            continue
        numba_fn(X, y, feats)  # compile
        t_nb = time_fn(numba_fn, X, y, feats)
        t_np = time_fn(numpy_fn, X, y, feats)
        assert numba_fn(X, y, feats) == numpy_fn(X, y, feats)
        print(f"{name:12s} rows={rows} attrs={attrs}: "
              f"numba {t_nb * 1e3:8.2f} ms  numpy {t_np * 1e3:8.2f} ms  "
              f"speedup {t_np / t_nb:5.2f}x")


def bench_traverse(rows, attrs):
    rng = np.random.default_rng(1)
    feats = rng.random((rows, attrs))
    labels = (feats[:, 0] + feats[:, 1] > 1.0).astype(np.float64)
    ds = ProjectDataset(
        name="bench", attributes=tuple(f"f{i}" for i in range(attrs)),
        features=feats, labels=labels, task=TaskKind.CLASSIFICATION,
    )
    forest = train_forest(ds, ForestParams(n_trees=30, seed=0))
    tree = forest.trees[0]
    X = rng.random((rows, attrs))
    args = (tree.feature, tree.threshold, tree.left, tree.right, tree.value, X)
    if kernels.traverse_numba is None:
        print("traverse: numba unavailable")
        return
    kernels.traverse_numba(*args)  # compile
    t_nb = time_fn(kernels.traverse_numba, *args)
    t_np = time_fn(kernels.traverse_numpy, *args)
    assert np.array_equal(kernels.traverse_numba(*args), kernels.traverse_numpy(*args))
    print(f"{'traverse':12s} rows={rows} attrs={attrs}: "
          f"numba {t_nb * 1e3:8.2f} ms  numpy {t_np * 1e3:8.2f} ms  "
          f"speedup {t_np / t_nb:5.2f}x")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=2000)
    parser.add_argument("--attrs", type=int, default=20)
    args = parser.parse_args()
    bench_splits(args.rows, args.attrs)
    bench_traverse(args.rows, args.attrs)
