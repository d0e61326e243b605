"""Independent brute-force oracles the tests check the real code against.

Everything here is written the slow, obvious way (double loops, dense
matrices, rank counting) and deliberately shares no code with the
package implementations it verifies.
"""
from __future__ import annotations

import math
import re

import numpy as np

_SPLIT = re.compile(r"[^0-9a-z]+")


def auc_pairwise(y_true, scores) -> float:
    """P(random positive outscores random negative), ties counting 1/2."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    pos = scores[y_true == 1]
    neg = scores[y_true == 0]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def _tokens(text: str) -> list[str]:
    return [t for t in _SPLIT.split(text.lower()) if t]


def _vocab(docs: list[str]) -> list[str]:
    seen: list[str] = []
    for doc in docs:
        for tok in _tokens(doc):
            if tok not in seen:
                seen.append(tok)
    return seen


def _tf_matrix(docs: list[str]) -> np.ndarray:
    vocab = _vocab(docs)
    index = {tok: i for i, tok in enumerate(vocab)}
    tf = np.zeros((len(docs), max(len(vocab), 1)))
    for d, doc in enumerate(docs):
        for tok in _tokens(doc):
            tf[d, index[tok]] += 1.0
    return tf


def _dense_cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 and nv == 0.0:
        return 1.0  # same zero-vector convention as the implementation
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v / (nu * nv))


def mean_pairwise_similarity(docs: list[str], algorithm: str) -> float:
    """Double-loop mean pairwise similarity over dense matrices."""
    n = len(docs)
    assert n >= 2
    if algorithm == "jaccard":
        sets = [set(_tokens(d)) for d in docs]
        vals = []
        for i in range(n):
            for j in range(i + 1, n):
                union = sets[i] | sets[j]
                vals.append(1.0 if not union else len(sets[i] & sets[j]) / len(union))
        return float(np.mean(vals))
    tf = _tf_matrix(docs)
    if algorithm == "tfidf":
        df = (tf > 0).sum(axis=0)
        with np.errstate(divide="ignore"):
            idf = np.where(df > 0, np.log(n / np.maximum(df, 1)), 0.0)
        tf = tf * idf
    vals = []
    for i in range(n):
        for j in range(i + 1, n):
            vals.append(_dense_cosine(tf[i], tf[j]))
    return float(np.mean(vals))


def max_autocorrelation(series, max_lag: int) -> float:
    """Plain-loop normalized autocorrelation, max positive value over lags."""
    x = [float(v) for v in series]
    mean = sum(x) / len(x)
    c = [v - mean for v in x]
    denom = sum(v * v for v in c)
    if denom == 0.0:
        return 0.0
    best = 0.0
    for lag in range(1, min(max_lag, len(c) - 1) + 1):
        num = sum(c[t] * c[t + lag] for t in range(len(c) - lag))
        r = num / denom
        if r > best:
            best = r
    return min(1.0, best)


def knn_prediction(X_train, y_train, x, k: int) -> float:
    """Exhaustive sort-by-distance neighbor vote, ties to lower row index."""
    dists = [
        (math.dist(row, x), i) for i, row in enumerate(np.asarray(X_train, dtype=float))
    ]
    dists.sort(key=lambda pair: (pair[0], pair[1]))
    chosen = [y_train[i] for _, i in dists[:k]]
    return float(np.mean(chosen))


def numeric_gradient(loss_fn, w: np.ndarray, b: float, eps: float = 1e-6):
    """Central finite differences of a scalar loss in (w, b)."""
    grad_w = np.zeros_like(w)
    for j in range(len(w)):
        wp, wm = w.copy(), w.copy()
        wp[j] += eps
        wm[j] -= eps
        grad_w[j] = (loss_fn(wp, b) - loss_fn(wm, b)) / (2 * eps)
    grad_b = (loss_fn(w, b + eps) - loss_fn(w, b - eps)) / (2 * eps)
    return grad_w, grad_b


def gaussian_posterior_1d(x, means, variances, priors):
    """Closed-form two-class posterior for a single feature."""
    dens = [
        priors[c]
        * math.exp(-((x - means[c]) ** 2) / (2 * variances[c]))
        / math.sqrt(2 * math.pi * variances[c])
        for c in (0, 1)
    ]
    return dens[1] / (dens[0] + dens[1])
