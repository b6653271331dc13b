# surrogate.py
"""
Random-forest regression surrogate over encoded configurations.

Trees are stored as flat node arrays (feature, threshold, left, right,
value). Uncertainty is the spread of the per-tree predictions.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import structlog

from errors import UnfitModelError
from space import DEFAULT_SPACE, Configuration, SearchSpaceDef, encode_config

log = structlog.get_logger(__name__)

LEAF = -1


@dataclass(frozen=True)
class ForestHyper:
    n_trees: int = 100
    min_leaf: int = 3
    max_features: int | None = None  # None -> ceil(d / 3)
    bootstrap: bool = True
    max_depth: int | None = None


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray  # int, LEAF for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # mean target of the node's samples
    n_samples: np.ndarray

    @classmethod
    def leaf(cls, value: float, n_samples: int = 1) -> "Tree":
        return cls(
            feature=np.array([LEAF]),
            threshold=np.array([0.0]),
            left=np.array([LEAF]),
            right=np.array([LEAF]),
            value=np.array([float(value)]),
            n_samples=np.array([n_samples]),
        )

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf prediction per row; samples with x <= threshold go left."""
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            feat = self.feature[node]
            inner = feat != LEAF
            if not inner.any():
                return self.value[node]
            go_left = X[rows[inner], feat[inner]] <= self.threshold[node[inner]]
            node[inner] = np.where(go_left, self.left[node[inner]], self.right[node[inner]])


@dataclass(frozen=True)
class ForestModel:
    trees: list[Tree]
    y_min: float
    y_max: float
    seed: int | None = None
    n_features: int | None = None
    hyper: ForestHyper = field(default_factory=ForestHyper)


class _TreeBuilder:
    def __init__(self, hyper: ForestHyper, max_features: int, rng: np.random.Generator):
        self.hyper = hyper
        self.max_features = max_features
        self.rng = rng
        self.feature, self.threshold, self.left, self.right = [], [], [], []
        self.value, self.n_samples = [], []

    def _new_node(self, y: np.ndarray) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(float(np.mean(y)))
        self.n_samples.append(len(y))
        return len(self.feature) - 1

    def best_split(self, X: np.ndarray, y: np.ndarray) -> tuple[int, float, float] | None:
        """(feature, threshold, child SSE) minimizing summed squared error, or None."""
        n, d = X.shape
        min_leaf = self.hyper.min_leaf
        best = None
        tried = 0
        for f in self.rng.permutation(d):
            if tried >= self.max_features:
                break
            order = np.argsort(X[:, f], kind="stable")
            xs, ys = X[order, f], y[order]
            if xs[0] == xs[-1]:
                continue  # constant features do not count against max_features
            tried += 1

            s1 = np.cumsum(ys)
            s2 = np.cumsum(ys * ys)
            i = np.arange(1, n)  # left child = first i sorted samples
            sse_left = s2[:-1] - s1[:-1] ** 2 / i
            sse_right = (s2[-1] - s2[:-1]) - (s1[-1] - s1[:-1]) ** 2 / (n - i)
            sse = sse_left + sse_right
            valid = (xs[1:] > xs[:-1]) & (i >= min_leaf) & (n - i >= min_leaf)
            if not valid.any():
                continue
            sse = np.where(valid, sse, np.inf)
            k = int(np.argmin(sse))
            if best is None or sse[k] < best[2]:
                best = (int(f), (xs[k] + xs[k + 1]) / 2.0, float(sse[k]))
        return best

    def grow(self, X: np.ndarray, y: np.ndarray, depth: int = 0) -> int:
        node = self._new_node(y)
        max_depth = self.hyper.max_depth
        if len(y) < 2 * self.hyper.min_leaf or np.ptp(y) == 0.0:
            return node
        if max_depth is not None and depth >= max_depth:
            return node
        split = self.best_split(X, y)
        if split is None:
            return node
        f, threshold, _ = split
        mask = X[:, f] <= threshold
        self.feature[node] = f
        self.threshold[node] = threshold
        self.left[node] = self.grow(X[mask], y[mask], depth + 1)
        self.right[node] = self.grow(X[~mask], y[~mask], depth + 1)
        return node

    def build(self) -> Tree:
        return Tree(
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            value=np.array(self.value, dtype=np.float64),
            n_samples=np.array(self.n_samples, dtype=np.int64),
        )


def fit(X: np.ndarray, y: np.ndarray, hyper: ForestHyper = ForestHyper(), seed: int = 0) -> ForestModel:
    """Bagged variance-reduction trees; deterministic per seed."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(y) == 0:
        raise UnfitModelError("cannot fit a forest on zero records")
    n, d = X.shape
    max_features = hyper.max_features or math.ceil(d / 3)

    trees = []
    for tree_seed in np.random.SeedSequence(seed).spawn(hyper.n_trees):
        rng = np.random.default_rng(tree_seed)
        idx = rng.integers(n, size=n) if hyper.bootstrap else np.arange(n)
        builder = _TreeBuilder(hyper, max_features, rng)
        builder.grow(X[idx], y[idx])
        trees.append(builder.build())

    log.debug("surrogate.fit", records=n, trees=len(trees))
    return ForestModel(trees, float(y.min()), float(y.max()), seed, d, hyper)


def predict_many(model: ForestModel | None, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(mean, spread) per row; spread is the population std across trees."""
    if model is None or not model.trees:
        raise UnfitModelError("surrogate has not been fit")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    per_tree = np.stack([tree.apply(X) for tree in model.trees])
    return per_tree.mean(axis=0), per_tree.std(axis=0)


def predict(
    model: ForestModel | None,
    config: Configuration | np.ndarray,
    space: SearchSpaceDef = DEFAULT_SPACE,
) -> tuple[float, float]:
    x = encode_config(config, space) if isinstance(config, Configuration) else config
    mean, spread = predict_many(model, x)
    return float(mean[0]), float(spread[0])


def dump_forest(model: ForestModel) -> str:
    """One node per line; leaves have feature=-1. Debug aid only."""
    lines = []
    for t, tree in enumerate(model.trees):
        for node in range(len(tree.feature)):
            lines.append(
                f"tree={t} node={node} feature={tree.feature[node]} "
                f"threshold={float(tree.threshold[node])!r} left={tree.left[node]} "
                f"right={tree.right[node]} value={float(tree.value[node])!r} n={tree.n_samples[node]}"
            )
    return "\n".join(lines) + ("\n" if lines else "")
