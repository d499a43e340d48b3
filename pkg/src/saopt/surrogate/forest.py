"""CART regression trees and a bagged forest built on the tree kernel."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .._backend import kernels
from .._rng import as_generator


@dataclass(frozen=True)
class ForestHyperparams:
    n_trees: int = 100
    criterion: str = "mse"
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: int = 5
    bootstrap: bool = True

    def __post_init__(self):
        for name in ("n_trees", "min_samples_split", "min_samples_leaf", "max_features"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be positive")
        if self.criterion != "mse":
            raise ValueError(f"unsupported split criterion {self.criterion!r}; only 'mse' is implemented")

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "criterion": self.criterion,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
        }


@dataclass
class TrainingSet:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=np.float64)
        y = np.asarray(self.targets, dtype=np.float64).ravel()
        if X.ndim == 1:
            X = X.reshape(-1, 1) if y.size == X.size else X.reshape(1, -1)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError(f"inputs {X.shape} and targets {y.shape} do not align")
        self.inputs = np.ascontiguousarray(X)
        self.targets = np.ascontiguousarray(y)

    def __len__(self):
        return self.targets.shape[0]

    @property
    def n_features(self) -> int:
        return self.inputs.shape[1]

    def append(self, other: "TrainingSet") -> "TrainingSet":
        if len(self) and len(other) and other.n_features != self.n_features:
            raise ValueError("cannot append training sets with different genome lengths")
        return TrainingSet(np.vstack([self.inputs, other.inputs]), np.concatenate([self.targets, other.targets]))


@dataclass
class Tree:
    """Flat node arrays; ``feature[i] == -1`` marks node ``i`` as a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features: int

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        # children always carry larger ids than their parent
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())


@dataclass
class RandomForestModel:
    hyperparams: ForestHyperparams = field(default_factory=ForestHyperparams)
    trees: list[Tree] = field(default_factory=list)
    training: TrainingSet | None = None
    sigma_train: float = float("nan")
    _packed: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def fitted(self) -> bool:
        return bool(self.trees)

    @property
    def n_features(self) -> int:
        if not self.fitted:
            raise RuntimeError("forest has not been fitted")
        return self.trees[0].n_features

    @property
    def n_samples(self) -> int:
        return 0 if self.training is None else len(self.training)

    def packed(self):
        if self._packed is None:
            self._packed = _pack(self.trees)
        return self._packed

    def predict(self, X) -> np.ndarray:
        return predict_forest(self, X)


def _pack(trees: list[Tree]):
    sizes = np.array([t.n_nodes for t in trees], dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    feature = np.concatenate([t.feature for t in trees])
    threshold = np.concatenate([t.threshold for t in trees])
    value = np.concatenate([t.value for t in trees])
    left = np.concatenate([np.where(t.left >= 0, t.left + o, -1) for t, o in zip(trees, offsets)])
    right = np.concatenate([np.where(t.right >= 0, t.right + o, -1) for t, o in zip(trees, offsets)])
    return tuple(np.ascontiguousarray(a) for a in (feature, threshold, left, right, value, offsets))


def _as_queries(X, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ValueError(f"expected genomes of length {n_features}, got shape {X.shape}")
    return np.ascontiguousarray(X)


def _grow(X: np.ndarray, y: np.ndarray, hp: ForestHyperparams, seed: int) -> Tree:
    order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))
    yc = np.ascontiguousarray(y - y.mean())
    parts = kernels.build_tree(
        X, y, yc, order, int(hp.max_features), int(hp.min_samples_split), int(hp.min_samples_leaf), int(seed)
    )
    return Tree(*parts, n_features=X.shape[1])


def _seed_from(rng) -> int:
    if isinstance(rng, (int, np.integer)):
        return int(rng) & ((1 << 64) - 1)
    return int(as_generator(rng).integers(0, 2**64, dtype=np.uint64))


def fit_tree(data: TrainingSet, hp: ForestHyperparams | None = None, feature_subset_rng=0) -> Tree:
    """Grow one unpruned CART tree on all of ``data`` (no resampling)."""
    hp = hp or ForestHyperparams()
    if len(data) < 1:
        raise ValueError("cannot fit a tree on an empty training set")
    return _grow(data.inputs, data.targets, hp, _seed_from(feature_subset_rng))


def predict_tree(tree: Tree, genome) -> np.ndarray | float:
    single = np.ndim(genome) == 1
    X = _as_queries(genome, tree.n_features)
    roots = np.zeros(1, dtype=np.int64)
    out = kernels.predict_forest(tree.feature, tree.threshold, tree.left, tree.right, tree.value, roots, X)
    return float(out[0]) if single else np.asarray(out)


def fit_forest(data: TrainingSet, hp: ForestHyperparams | None = None, rng=None, workers: int = 1) -> RandomForestModel:
    """Bagged CART ensemble. Tree ``t`` owns seed ``seeds[t]`` so fits are order-independent."""
    hp = hp or ForestHyperparams()
    n = len(data)
    if n < 2:
        raise ValueError(f"need at least 2 training samples, got {n}")
    seeds = as_generator(rng).integers(0, 2**64, size=hp.n_trees, dtype=np.uint64)
    X, y = data.inputs, data.targets

    def one(seed):
        seed = int(seed)
        if hp.bootstrap:
            idx = np.random.Generator(np.random.Philox(seed)).integers(0, n, size=n)
            return _grow(np.ascontiguousarray(X[idx]), np.ascontiguousarray(y[idx]), hp, seed)
        return _grow(X, y, hp, seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(one, seeds))
    else:
        trees = [one(s) for s in seeds]
    return RandomForestModel(hp, trees, data, float(np.std(y, ddof=1)))


def predict_forest(model: RandomForestModel, genome) -> np.ndarray | float:
    """Mean of the per-tree predictions."""
    if not model.fitted:
        raise RuntimeError("forest has not been fitted")
    single = np.ndim(genome) == 1
    X = _as_queries(genome, model.n_features)
    feature, threshold, left, right, value, roots = model.packed()
    out = kernels.predict_forest(feature, threshold, left, right, value, roots, X)
    return float(out[0]) if single else np.asarray(out)


def r2_score(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else float("-inf")
    return 1.0 - ss_res / ss_tot


def normalized_mae(y_true, y_pred, sigma: float) -> float:
    """1 - MAE / sigma; 1 is a perfect fit."""
    mae = float(np.mean(np.abs(np.asarray(y_true, dtype=np.float64) - np.asarray(y_pred, dtype=np.float64))))
    return 1.0 - mae / sigma if sigma > 0 else (1.0 if mae == 0 else float("-inf"))
