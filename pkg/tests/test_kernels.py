import numpy as np
import pytest

from bellwether import kernels


pytestmark = pytest.mark.skipif(
    not kernels.NUMBA_AVAILABLE, reason="numba not installed"
)


@pytest.mark.parametrize("kind", ["cls", "reg"])
def test_numba_and_numpy_splits_agree(kind):
    rng = np.random.default_rng(0)
    numba_fn = kernels.split_cls_numba if kind == "cls" else kernels.split_reg_numba
    numpy_fn = kernels.split_cls_numpy if kind == "cls" else kernels.split_reg_numpy
    for _ in range(150):
        n = int(rng.integers(4, 80))
        d = int(rng.integers(1, 6))
        X = rng.random((n, d))
        if kind == "cls":
            y = (rng.random(n) > rng.uniform(0.2, 0.8)).astype(np.float64)
        else:
            y = rng.normal(size=n)
        feats = np.arange(d, dtype=np.int64)
        assert numba_fn(X, y, feats) == numpy_fn(X, y, feats)


def test_splits_agree_with_tied_values():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(6, 40))
        X = rng.integers(0, 4, (n, 3)).astype(np.float64)  # heavy ties
        y = (rng.random(n) > 0.5).astype(np.float64)
        feats = np.arange(3, dtype=np.int64)
        a = kernels.split_cls_numba(X, y, feats)
        b = kernels.split_cls_numpy(X, y, feats)
        assert a[0] == b[0]
        assert a[1] == pytest.approx(b[1])
        assert a[2] == pytest.approx(b[2])


def test_traversals_agree():
    rng = np.random.default_rng(2)
    # random but well-formed tree over 3 features
    feature = np.array([0, 2, -1, -1, -1], dtype=np.int64)
    threshold = np.array([0.5, 0.25, 0.0, 0.0, 0.0])
    left = np.array([1, 3, -1, -1, -1], dtype=np.int64)
    right = np.array([2, 4, -1, -1, -1], dtype=np.int64)
    value = np.array([0.0, 0.0, 1.0, 2.0, 3.0])
    X = rng.random((200, 3))
    a = kernels.traverse_numba(feature, threshold, left, right, value, X)
    b = kernels.traverse_numpy(feature, threshold, left, right, value, X)
    assert np.array_equal(a, b)


def test_no_positive_gain_on_constant_labels():
    rng = np.random.default_rng(3)
    X = rng.random((30, 2))
    y = np.ones(30)
    feats = np.arange(2, dtype=np.int64)
    for fn in (kernels.split_cls_numpy, kernels.split_reg_numpy):
        f, _, _ = fn(X, y, feats)
        assert f == -1
