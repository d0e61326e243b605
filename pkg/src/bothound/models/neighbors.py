"""k-nearest-neighbors classifier over Euclidean distance.

Distance ties resolve toward the lower training-row index (stable sort),
so predictions are deterministic.
"""
from __future__ import annotations

import numpy as np

from ..errors import DataFormatError


class KNearestNeighbors:
    def __init__(self, k: int = 5):
        if k < 1:
            raise DataFormatError("k must be >= 1")
        self.k = k
        self.X: np.ndarray | None = None
        self.y: np.ndarray | None = None

    @property
    def params(self) -> dict:
        return {"k": self.k}

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KNearestNeighbors":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if len(X) == 0:
            raise DataFormatError("fit needs a non-empty matrix")
        if self.k > len(X):
            raise DataFormatError(f"k={self.k} exceeds the {len(X)} training rows")
        self.X = X
        self.y = y
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.X is None:
            raise DataFormatError("model not fitted")
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X))
        # chunked so the distance matrix stays modest for large probes
        chunk = max(1, 2_000_000 // max(len(self.X), 1))
        for lo in range(0, len(X), chunk):
            block = X[lo : lo + chunk]
            d2 = ((block[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
            nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            out[lo : lo + len(block)] = self.y[nearest].mean(axis=1)
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        if self.X is None:
            raise DataFormatError("model not fitted")
        return {"params": self.params, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "KNearestNeighbors":
        model = cls(**doc["params"])
        model.X = np.asarray(doc["X"], dtype=np.float64)
        model.y = np.asarray(doc["y"], dtype=np.int64)
        return model
