"""L2-regularized logistic regression trained by plain gradient descent.

Expects standardized inputs (the dataset module's preprocessing contract);
the bias term is excluded from the penalty.
"""
from __future__ import annotations

import numpy as np

from ..errors import DataFormatError


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LogisticRegression:
    def __init__(
        self,
        l2_lambda: float = 0.01,
        learning_rate: float = 0.5,
        max_iters: int = 2000,
        tol: float = 1e-6,
    ):
        if l2_lambda < 0 or learning_rate <= 0 or max_iters < 1 or tol < 0:
            raise DataFormatError("bad logistic-regression hyperparameters")
        self.l2_lambda = l2_lambda
        self.learning_rate = learning_rate
        self.max_iters = max_iters
        self.tol = tol
        self.weights: np.ndarray | None = None
        self.bias: float = 0.0
        self.n_iters_: int = 0

    @property
    def params(self) -> dict:
        return {
            "l2_lambda": self.l2_lambda,
            "learning_rate": self.learning_rate,
            "max_iters": self.max_iters,
            "tol": self.tol,
        }

    def loss(self, X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float) -> float:
        """Mean logistic loss plus l2_lambda * ||w||^2 / 2."""
        z = X @ w + b
        # log(1 + exp(-m)) written stably for both signs of the margin
        margins = np.where(y == 1, z, -z)
        nll = np.logaddexp(0.0, -margins).mean()
        return float(nll + 0.5 * self.l2_lambda * np.dot(w, w))

    def gradient(
        self, X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float
    ) -> tuple[np.ndarray, float]:
        p = sigmoid(X @ w + b)
        err = p - y
        grad_w = X.T @ err / len(X) + self.l2_lambda * w
        grad_b = float(err.mean())
        return grad_w, grad_b

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogisticRegression":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if len(X) == 0 or X.ndim != 2:
            raise DataFormatError("fit needs a non-empty 2-D matrix")
        if not np.isfinite(X).all() or not np.isfinite(y).all():
            raise DataFormatError("fit needs finite inputs")
        w = np.zeros(X.shape[1])
        b = 0.0
        for it in range(self.max_iters):
            grad_w, grad_b = self.gradient(X, y, w, b)
            if max(np.abs(grad_w).max(initial=0.0), abs(grad_b)) < self.tol:
                break
            w -= self.learning_rate * grad_w
            b -= self.learning_rate * grad_b
        self.weights = w
        self.bias = b
        self.n_iters_ = it + 1
        if not np.isfinite(w).all() or not np.isfinite(b):
            raise DataFormatError("logistic regression diverged; lower the learning rate")
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.weights is None:
            raise DataFormatError("model not fitted")
        X = np.asarray(X, dtype=np.float64)
        return sigmoid(X @ self.weights + self.bias)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        if self.weights is None:
            raise DataFormatError("model not fitted")
        return {"params": self.params, "weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_dict(cls, doc: dict) -> "LogisticRegression":
        model = cls(**doc["params"])
        model.weights = np.asarray(doc["weights"], dtype=np.float64)
        model.bias = float(doc["bias"])
        return model
