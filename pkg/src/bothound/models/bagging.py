"""Bagging ensemble with hard voting and a decision threshold.

Every member trains on an independent bootstrap resample of the full
training set (same size, uniform with replacement). At prediction time
each member casts a hard vote from its own probability; the ensemble
score g(x) is the bot-vote fraction, and accounts with g(x) >= threshold
are labeled bots.
"""
from __future__ import annotations

import numpy as np

from ..errors import DataFormatError
from .bayes import GaussianNB
from .forest import RandomForest
from .linear import LogisticRegression
from .neighbors import KNearestNeighbors
from .tree import DecisionTree

BASE_KINDS = {
    "tree": DecisionTree,
    "forest": RandomForest,
    "logreg": LogisticRegression,
    "gnb": GaussianNB,
    "knn": KNearestNeighbors,
}

DEFAULT_MEMBERS = 11  # odd, to avoid split votes
DEFAULT_THRESHOLD = 0.5


def fit_base(kind: str, params: dict, X: np.ndarray, y: np.ndarray, seed: int):
    """Construct and fit one weak classifier of the given kind."""
    if kind not in BASE_KINDS:
        raise DataFormatError(f"unknown base kind {kind!r}")
    params = dict(params)
    if kind == "forest":
        params.setdefault("seed", seed)
        return RandomForest(**params).fit(X, y)
    if kind == "tree":
        return DecisionTree(**params).fit(X, y, rng=np.random.default_rng(seed))
    return BASE_KINDS[kind](**params).fit(X, y)


class BaggingEnsemble:
    def __init__(
        self,
        base_kind: str,
        base_params: dict,
        members: list,
        member_seeds: list[int],
        threshold: float = DEFAULT_THRESHOLD,
        preprocessing: dict | None = None,
        n_features: int | None = None,
    ):
        if not members:
            raise DataFormatError("ensemble needs at least one member")
        if not (0.0 < threshold <= 1.0):
            raise DataFormatError("threshold must be in (0, 1]")
        self.base_kind = base_kind
        self.base_params = dict(base_params)
        self.members = members
        self.member_seeds = list(member_seeds)
        self.threshold = threshold
        self.preprocessing = preprocessing
        self.n_features = n_features

    @property
    def m(self) -> int:
        return len(self.members)

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if self.n_features is not None and X.shape[1] != self.n_features:
            raise DataFormatError(
                f"expected {self.n_features} feature columns, got {X.shape[1]}"
            )
        return X

    def vote_fraction(self, X: np.ndarray) -> np.ndarray:
        """g(x): fraction of members whose own probability reaches 0.5."""
        X = self._check(X)
        votes = np.zeros(len(X), dtype=np.float64)
        for member in self.members:
            votes += (member.predict_proba(X) >= 0.5).astype(np.float64)
        return votes / self.m

    def predict(self, X: np.ndarray, threshold: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(labels, vote fractions); a row is a bot iff g(x) >= threshold."""
        t = self.threshold if threshold is None else threshold
        g = self.vote_fraction(X)
        return (g >= t).astype(np.int64), g

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Alias for the vote fraction, so evaluation code treats all models alike."""
        return self.vote_fraction(X)


def fit_bagging(
    X: np.ndarray,
    y: np.ndarray,
    base_kind: str,
    base_params: dict,
    m: int = DEFAULT_MEMBERS,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    preprocessing: dict | None = None,
) -> BaggingEnsemble:
    """Fit m members, each on its own same-size bootstrap resample."""
    if m < 1:
        raise DataFormatError("m must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise DataFormatError("fit needs a non-empty matrix")
    seed_rng = np.random.default_rng(seed)
    member_seeds = [int(s) for s in seed_rng.integers(0, 2**63 - 1, size=m)]
    members = []
    for member_seed in member_seeds:
        idx = bootstrap_indices(len(X), member_seed)
        members.append(fit_base(base_kind, base_params, X[idx], y[idx], member_seed))
    return BaggingEnsemble(
        base_kind=base_kind,
        base_params=base_params,
        members=members,
        member_seeds=member_seeds,
        threshold=threshold,
        preprocessing=preprocessing,
        n_features=X.shape[1],
    )


def bootstrap_indices(n: int, seed: int) -> np.ndarray:
    """The n-draw with-replacement resample a stored member seed reproduces."""
    return np.random.default_rng(seed).integers(0, n, size=n)
