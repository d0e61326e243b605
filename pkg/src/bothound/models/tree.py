"""CART decision tree with Gini impurity, built from scratch on numpy.

The fitted tree is stored as flat parallel arrays (feature, threshold,
children, class counts) so batch prediction is a handful of vectorized
hops instead of per-row recursion. Split-gain ties break toward the
lowest feature index, then the lowest threshold, which makes training
fully deterministic for a fixed feature order.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import DataFormatError

_NO_FEATURE = -1


def gini(counts: np.ndarray) -> float:
    """Gini impurity of a class-count vector."""
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.sum(p * p))


def resolve_max_features(max_features: int | str | None, n_features: int) -> int:
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, round(math.sqrt(n_features)))
    mf = int(max_features)
    if not (1 <= mf <= n_features):
        raise DataFormatError(f"max_features {max_features!r} out of range")
    return mf


def _best_split(
    X: np.ndarray, y: np.ndarray, feat: np.ndarray, min_leaf: int
) -> tuple[int, float] | None:
    """Lowest weighted-child-Gini split over the candidate features.

    Returns (feature index, threshold) or None when no valid split exists.
    Candidate thresholds are midpoints between consecutive distinct sorted
    values; both children must keep at least ``min_leaf`` rows.
    """
    n = X.shape[0]
    if n < 2 * min_leaf or n < 2:
        return None
    Xc = X[:, feat]
    order = np.argsort(Xc, axis=0, kind="stable")
    Xs = np.take_along_axis(Xc, order, axis=0)
    ys = y[order]
    cum = np.cumsum(ys, axis=0, dtype=np.float64)
    total = cum[-1]
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    bl = cum[:-1]
    br = total[None, :] - bl
    hl = nl - bl
    hr = nr - br
    # n_l * gini_l + n_r * gini_r, dropping the constant 1/n factor
    cost = (nl - (bl * bl + hl * hl) / nl) + (nr - (br * br + hr * hr) / nr)
    valid = (Xs[1:] > Xs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
    cost = np.where(valid, cost, np.inf)
    pos = np.argmin(cost, axis=0)  # first minimum -> lowest threshold
    col_best = cost[pos, np.arange(cost.shape[1])]
    j = int(np.argmin(col_best))  # first minimum -> lowest feature index
    if not np.isfinite(col_best[j]):
        return None
    i = int(pos[j])
    threshold = 0.5 * (Xs[i, j] + Xs[i + 1, j])
    # guard against midpoints that collapse onto the left value in float math
    if threshold <= Xs[i, j]:
        threshold = Xs[i + 1, j]
    return int(feat[j]), float(threshold)


class DecisionTree:
    """Binary CART classifier: predicts P(bot) as the training-leaf bot fraction."""

    def __init__(
        self,
        max_depth: int | None = None,
        min_samples_leaf: int = 1,
        max_features: int | str | None = None,
    ):
        if max_depth is not None and max_depth < 0:
            raise DataFormatError("max_depth must be >= 0")
        if min_samples_leaf < 1:
            raise DataFormatError("min_samples_leaf must be >= 1")
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        # flat node arrays, filled by fit()
        self.feature: np.ndarray | None = None
        self.threshold: np.ndarray | None = None
        self.left: np.ndarray | None = None
        self.right: np.ndarray | None = None
        self.counts: np.ndarray | None = None  # (nodes, 2) human/bot
        self.n_features_: int = 0

    @property
    def params(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
        }

    def fit(
        self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator | None = None
    ) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or len(X) == 0:
            raise DataFormatError("fit needs a non-empty 2-D matrix")
        if len(X) != len(y):
            raise DataFormatError("X and y length mismatch")
        if not np.isfinite(X).all():
            raise DataFormatError("fit needs finite feature values")
        if not np.isin(y, (0, 1)).all():
            raise DataFormatError("labels must be 0/1")
        y = y.astype(np.int64)
        self.n_features_ = X.shape[1]
        mf = resolve_max_features(self.max_features, self.n_features_)
        if mf < self.n_features_ and rng is None:
            rng = np.random.default_rng(0)

        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        counts: list[tuple[int, int]] = []

        def new_node(idx: np.ndarray) -> int:
            node = len(feature)
            nb = int(y[idx].sum())
            feature.append(_NO_FEATURE)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            counts.append((len(idx) - nb, nb))
            return node

        max_depth = self.max_depth if self.max_depth is not None else np.inf
        stack: list[tuple[int, np.ndarray, int]] = [(new_node(np.arange(len(X))), np.arange(len(X)), 0)]
        while stack:
            node, idx, depth = stack.pop()
            human, bot = counts[node]
            if depth >= max_depth or human == 0 or bot == 0:
                continue
            if mf < self.n_features_:
                cand = np.sort(rng.choice(self.n_features_, size=mf, replace=False))
            else:
                cand = np.arange(self.n_features_)
            split = _best_split(X[idx], y[idx], cand, self.min_samples_leaf)
            if split is None:
                continue
            j, thr = split
            go_left = X[idx, j] <= thr
            feature[node] = j
            threshold[node] = thr
            l_node = new_node(idx[go_left])
            r_node = new_node(idx[~go_left])
            left[node] = l_node
            right[node] = r_node
            # right pushed first so the left child is processed first (stable ids)
            stack.append((r_node, idx[~go_left], depth + 1))
            stack.append((l_node, idx[go_left], depth + 1))

        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)
        return self

    @property
    def n_nodes(self) -> int:
        return 0 if self.feature is None else len(self.feature)

    def _leaf_ids(self, X: np.ndarray) -> np.ndarray:
        if self.feature is None:
            raise DataFormatError("tree not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise DataFormatError(f"expected {self.n_features_} feature columns")
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            feat = self.feature[node]
            active = feat != _NO_FEATURE
            if not active.any():
                return node
            rows = np.flatnonzero(active)
            f = feat[rows]
            goes_left = X[rows, f] <= self.threshold[node[rows]]
            node[rows] = np.where(goes_left, self.left[node[rows]], self.right[node[rows]])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """P(bot) per row, from leaf class fractions."""
        leaves = self._leaf_ids(X)
        c = self.counts[leaves].astype(np.float64)
        return c[:, 1] / c.sum(axis=1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def impurity_decrease(self) -> np.ndarray:
        """Total weighted Gini decrease credited to each feature (unnormalized)."""
        if self.feature is None:
            raise DataFormatError("tree not fitted")
        out = np.zeros(self.n_features_, dtype=np.float64)
        n_root = self.counts[0].sum()
        for node in range(self.n_nodes):
            j = self.feature[node]
            if j == _NO_FEATURE:
                continue
            c = self.counts[node]
            cl = self.counts[self.left[node]]
            cr = self.counts[self.right[node]]
            n, nl_, nr_ = c.sum(), cl.sum(), cr.sum()
            drop = gini(c) - (nl_ * gini(cl) + nr_ * gini(cr)) / n
            out[j] += (n / n_root) * drop
        return out

    def to_dict(self) -> dict:
        """Nested node document {feature_index, threshold, left, right, class_counts}."""
        if self.feature is None:
            raise DataFormatError("tree not fitted")

        def build(node: int) -> dict:
            doc: dict = {"class_counts": self.counts[node].tolist()}
            if self.feature[node] != _NO_FEATURE:
                doc["feature_index"] = int(self.feature[node])
                doc["threshold"] = float(self.threshold[node])
                doc["left"] = build(int(self.left[node]))
                doc["right"] = build(int(self.right[node]))
            return doc

        return {"params": self.params, "n_features": self.n_features_, "root": build(0)}

    @classmethod
    def from_dict(cls, doc: dict) -> "DecisionTree":
        tree = cls(**doc["params"])
        tree.n_features_ = int(doc["n_features"])
        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        counts: list[list[int]] = []

        def walk(node_doc: dict) -> int:
            node = len(feature)
            feature.append(_NO_FEATURE)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            counts.append([int(c) for c in node_doc["class_counts"]])
            if "feature_index" in node_doc:
                feature[node] = int(node_doc["feature_index"])
                threshold[node] = float(node_doc["threshold"])
                left[node] = walk(node_doc["left"])
                right[node] = walk(node_doc["right"])
            return node

        walk(doc["root"])
        tree.feature = np.asarray(feature, dtype=np.int64)
        tree.threshold = np.asarray(threshold, dtype=np.float64)
        tree.left = np.asarray(left, dtype=np.int64)
        tree.right = np.asarray(right, dtype=np.int64)
        tree.counts = np.asarray(counts, dtype=np.int64)
        return tree
