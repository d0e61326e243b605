"""Random forest: bootstrapped CARTs with per-split random feature subsets."""
from __future__ import annotations

import numpy as np

from ..errors import DataFormatError
from .tree import DecisionTree


class RandomForest:
    """Averages leaf probabilities over ``n_trees`` randomized CARTs.

    Each tree sees a bootstrap resample of the training rows (same size,
    drawn with replacement) unless ``bootstrap=False``, and considers a
    random feature subset at every split (default sqrt of the feature
    count, rounded).
    """

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int | None = None,
        min_samples_leaf: int = 1,
        max_features: int | str | None = "sqrt",
        bootstrap: bool = True,
        seed: int = 0,
    ):
        if n_trees < 1:
            raise DataFormatError("n_trees must be >= 1")
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed
        self.trees: list[DecisionTree] = []

    @property
    def params(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
        }

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if len(X) == 0:
            raise DataFormatError("fit needs a non-empty matrix")
        rng = np.random.default_rng(self.seed)
        tree_seeds = rng.integers(0, 2**63 - 1, size=self.n_trees)
        self.trees = []
        for t in range(self.n_trees):
            trng = np.random.default_rng(int(tree_seeds[t]))
            if self.bootstrap:
                idx = trng.integers(0, len(X), size=len(X))
                Xt, yt = X[idx], y[idx]
            else:
                Xt, yt = X, y
            tree = DecisionTree(
                max_depth=self.max_depth,
                min_samples_leaf=self.min_samples_leaf,
                max_features=self.max_features,
            )
            tree.fit(Xt, yt, rng=trng)
            self.trees.append(tree)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise DataFormatError("forest not fitted")
        total = np.zeros(len(X), dtype=np.float64)
        for tree in self.trees:
            total += tree.predict_proba(X)
        return total / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def impurity_decrease(self) -> np.ndarray:
        if not self.trees:
            raise DataFormatError("forest not fitted")
        return np.mean([tree.impurity_decrease() for tree in self.trees], axis=0)

    def to_dict(self) -> dict:
        return {"params": self.params, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, doc: dict) -> "RandomForest":
        forest = cls(**doc["params"])
        forest.trees = [DecisionTree.from_dict(td) for td in doc["trees"]]
        return forest
