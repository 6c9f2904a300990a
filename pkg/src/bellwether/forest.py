"""Random forest learner and the transfer-strategy registry.

Trees are grown CART-style (numeric "attr <= threshold" splits at
midpoints of sorted values) on bootstrap samples, with a random feature
subset considered at each node. Classification predicts the majority
vote across trees with ties resolved to the negative class; regression
predicts the mean. The split search runs through the kernels module so
it can be numba-compiled.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data import ProjectDataset, TaskKind
from .errors import ConfigError, DataValidationError, NotFittedError


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    features_per_split: int | None = None  # None = round(sqrt(n_attrs))
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.min_samples_split < 2:
            raise ConfigError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1 or None")


@dataclass
class Tree:
    """Flat-array decision tree; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    importance: np.ndarray  # per-attribute accumulated impurity decrease

    def predict(self, X: np.ndarray) -> np.ndarray:
        return kernels.traverse(
            self.feature, self.threshold, self.left, self.right, self.value, X
        )


class _TreeBuilder:
    def __init__(self, X, y, task, params, rng, n_total):
        self.X = X
        self.y = y
        self.task = task
        self.params = params
        self.rng = rng
        self.n_total = float(n_total)
        self.split = kernels.split_cls if task is TaskKind.CLASSIFICATION else kernels.split_reg
        self.feature, self.threshold = [], []
        self.left, self.right, self.value = [], [], []
        self.importance = np.zeros(X.shape[1], dtype=np.float64)
        d = X.shape[1]
        self.mtry = params.features_per_split or max(1, int(round(np.sqrt(d))))
        self.mtry = min(self.mtry, d)

    def _leaf_value(self, idx) -> float:
        if self.task is TaskKind.CLASSIFICATION:
            pos = self.y[idx].sum()
            # vote tie inside a leaf resolves to negative
            return 1.0 if 2.0 * pos > idx.size else 0.0
        return float(self.y[idx].mean())

    def _add_node(self) -> int:
        for lst in (self.feature, self.threshold, self.left, self.right, self.value):
            lst.append(0)
        return len(self.feature) - 1

    def build(self, idx, depth=0) -> int:
        node = self._add_node()
        n = idx.size
        splittable = (
            n >= self.params.min_samples_split
            and (self.params.max_depth is None or depth < self.params.max_depth)
            and np.ptp(self.y[idx]) > 0.0
        )
        if splittable:
            feats = np.sort(self.rng.choice(self.X.shape[1], self.mtry, replace=False))
            sub = np.ascontiguousarray(self.X[np.ix_(idx, feats)])
            f_local, thr, gain = self.split(
                sub, self.y[idx], np.arange(self.mtry, dtype=np.int64)
            )
            if f_local >= 0:
                f = int(feats[f_local])
                self.importance[f] += (n / self.n_total) * gain
                mask = self.X[idx, f] <= thr
                self.feature[node] = f
                self.threshold[node] = thr
                self.left[node] = self.build(idx[mask], depth + 1)
                self.right[node] = self.build(idx[~mask], depth + 1)
                self.value[node] = 0.0
                return node
        self.feature[node] = -1
        self.threshold[node] = 0.0
        self.left[node] = -1
        self.right[node] = -1
        self.value[node] = self._leaf_value(idx)
        return node

    def finish(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64),
            importance=self.importance,
        )


@dataclass
class Forest:
    trees: list
    task: TaskKind
    attributes: tuple
    params: ForestParams
    training_meta: dict = field(default_factory=dict)

    def predict(self, X: np.ndarray, attributes=None) -> np.ndarray:
        if attributes is not None and tuple(attributes) != self.attributes:
            raise DataValidationError("prediction schema does not match forest attributes")
        X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
        if X.ndim != 2 or X.shape[1] != len(self.attributes):
            raise DataValidationError(
                f"expected {len(self.attributes)} feature columns, got {X.shape}"
            )
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict(X)
        if self.task is TaskKind.CLASSIFICATION:
            # majority vote; exact tie -> negative
            return (2.0 * acc > len(self.trees)).astype(np.float64)
        return acc / len(self.trees)


def rebalance(data: ProjectDataset, ratio=(1, 2), seed: int = 0) -> ProjectDataset:
    """Subsample the over-represented class down to a pos:neg ratio.

    Never duplicates rows; training-data only by convention. With the
    default 1:2 ratio, negatives above twice the positive count are
    subsampled, and positives above half the negative count likewise.
    """
    if data.task is not TaskKind.CLASSIFICATION:
        raise DataValidationError(f"{data.name}: rebalance applies to classification only")
    r_pos, r_neg = ratio
    if r_pos < 1 or r_neg < 1:
        raise ConfigError(f"bad rebalance ratio {ratio}")
    pos_idx = np.flatnonzero(data.labels == 1.0)
    neg_idx = np.flatnonzero(data.labels == 0.0)
    if pos_idx.size == 0 or neg_idx.size == 0:
        raise DataValidationError(f"{data.name}: rebalance needs both classes present")
    rng = np.random.default_rng(seed)
    want_neg = (pos_idx.size * r_neg) // r_pos
    want_pos = (neg_idx.size * r_pos) // r_neg
    if neg_idx.size > want_neg:
        neg_idx = rng.choice(neg_idx, want_neg, replace=False)
    elif pos_idx.size > want_pos:
        pos_idx = rng.choice(pos_idx, max(want_pos, 1), replace=False)
    keep = np.sort(np.concatenate([pos_idx, neg_idx]))
    return data.replace(features=data.features[keep], labels=data.labels[keep])


def train_forest(data: ProjectDataset, params: ForestParams) -> Forest:
    """Train a random forest; deterministic for fixed (data, params)."""
    if data.n_rows < params.min_samples_split:
        raise DataValidationError(
            f"{data.name}: {data.n_rows} rows < min_samples_split {params.min_samples_split}"
        )
    if data.task is TaskKind.CLASSIFICATION and np.ptp(data.labels) == 0.0:
        raise DataValidationError(f"{data.name}: single-class training data")
    n = data.n_rows
    trees = []
    # per-tree seeds derive from (forest seed, tree index): schedule independent
    children = np.random.SeedSequence(params.seed).spawn(params.n_trees)
    for ss in children:
        rng = np.random.default_rng(ss)
        sample = rng.integers(0, n, n)
        builder = _TreeBuilder(
            data.features[sample], data.labels[sample], data.task, params, rng, n
        )
        builder.build(np.arange(n, dtype=np.int64))
        trees.append(builder.finish())
    meta = {"n_rows": n, "params": params}
    if data.task is TaskKind.CLASSIFICATION:
        meta["positive"] = int(data.labels.sum())
        meta["negative"] = int(n - data.labels.sum())
    return Forest(
        trees=trees,
        task=data.task,
        attributes=data.attributes,
        params=params,
        training_meta=meta,
    )


def feature_importance(forest: Forest) -> list:
    """Attributes ranked by total impurity decrease; scores sum to 1.

    Forests whose trees never split yield an empty ranking.
    """
    total = np.zeros(len(forest.attributes), dtype=np.float64)
    for tree in forest.trees:
        total += tree.importance
    s = total.sum()
    if s <= 0.0:
        return []
    scores = total / s
    order = np.argsort(-scores, kind="stable")
    return [
        (forest.attributes[j], float(scores[j])) for j in order if scores[j] > 0.0
    ]


class TransferStrategy:
    """fit(source) then predict(target rows); registered by name."""

    name = "abstract"

    def fit(self, source: ProjectDataset, params: ForestParams):
        raise NotImplementedError

    def predict(self, features: np.ndarray, attributes=None) -> np.ndarray:
        raise NotImplementedError


class DirectStrategy(TransferStrategy):
    """The bellwether method: train on the source, apply unchanged.

    Classification sources are rebalanced to `ratio` before training;
    target rows are never transformed.
    """

    name = "direct"

    def __init__(self, ratio=(1, 2)):
        self.ratio = ratio
        self.forest = None

    def fit(self, source: ProjectDataset, params: ForestParams):
        if source.task is TaskKind.CLASSIFICATION:
            source = rebalance(source, self.ratio, seed=params.seed)
        self.forest = train_forest(source, params)
        return self

    def predict(self, features, attributes=None):
        if self.forest is None:
            raise NotFittedError("direct strategy queried before fit")
        return self.forest.predict(features, attributes)


_STRATEGIES = {"direct": DirectStrategy}


def register_strategy(name: str, factory) -> None:
    """Register a strategy factory; 'tca+', 'tnb', 'vcb' are reserved plugin names."""
    _STRATEGIES[name] = factory


def strategy_names() -> list:
    return sorted(_STRATEGIES)


def make_strategy(name: str, **kwargs) -> TransferStrategy:
    try:
        factory = _STRATEGIES[name]
    except KeyError:
        raise ConfigError(
            f"unknown strategy {name!r}; registered: {', '.join(strategy_names())}"
        ) from None
    return factory(**kwargs)
