"""Gaussian naive Bayes with a relative variance floor."""
from __future__ import annotations

import numpy as np

from ..errors import DataFormatError


class GaussianNB:
    def __init__(self, variance_floor_ratio: float = 1e-9):
        self.variance_floor_ratio = variance_floor_ratio
        self.means: np.ndarray | None = None  # (2, d)
        self.variances: np.ndarray | None = None  # (2, d)
        self.log_priors: np.ndarray | None = None  # (2,)

    @property
    def params(self) -> dict:
        return {"variance_floor_ratio": self.variance_floor_ratio}

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GaussianNB":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if len(X) == 0:
            raise DataFormatError("fit needs a non-empty matrix")
        if len(np.unique(y)) < 2:
            raise DataFormatError("Gaussian NB needs both classes present")
        floor = self.variance_floor_ratio * max(float(X.var(axis=0).max()), 1e-300)
        means = np.empty((2, X.shape[1]))
        variances = np.empty((2, X.shape[1]))
        priors = np.empty(2)
        for cls in (0, 1):
            rows = X[y == cls]
            means[cls] = rows.mean(axis=0)
            variances[cls] = np.maximum(rows.var(axis=0), floor)
            priors[cls] = len(rows) / len(X)
        self.means = means
        self.variances = variances
        self.log_priors = np.log(priors)
        return self

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        """(n, 2) log prior + sum of per-feature Gaussian log densities."""
        if self.means is None:
            raise DataFormatError("model not fitted")
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((len(X), 2))
        for cls in (0, 1):
            var = self.variances[cls]
            log_det = np.sum(np.log(2.0 * np.pi * var))
            sq = ((X - self.means[cls]) ** 2 / var).sum(axis=1)
            out[:, cls] = self.log_priors[cls] - 0.5 * (log_det + sq)
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        shifted = jll - jll.max(axis=1, keepdims=True)
        expd = np.exp(shifted)
        return expd[:, 1] / expd.sum(axis=1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        if self.means is None:
            raise DataFormatError("model not fitted")
        return {
            "params": self.params,
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "log_priors": self.log_priors.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GaussianNB":
        model = cls(**doc["params"])
        model.means = np.asarray(doc["means"], dtype=np.float64)
        model.variances = np.asarray(doc["variances"], dtype=np.float64)
        model.log_priors = np.asarray(doc["log_priors"], dtype=np.float64)
        return model
