"""Binary-classification metrics, ROC/AUC, feature importance, chi-squared.

Bot is the positive class throughout. AUC comes from a descending
threshold sweep with the trapezoidal rule, which equals the probability
that a random bot outscores a random human (ties counting one half).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .features import FEATURE_NAMES


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: tuple[int, int, int, int]  # tp, fp, tn, fn
    auc: float | None = None
    roc: list[tuple[float, float, float]] | None = None  # (fpr, tpr, threshold)


def confusion_metrics(y_true: np.ndarray, y_pred: np.ndarray) -> MetricsReport:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise DataFormatError("y_true and y_pred length mismatch")
    if len(y_true) == 0:
        raise DataFormatError("metrics need at least one row")
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    accuracy = (tp + tn) / len(y_true)
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        confusion=(tp, fp, tn, fn),
    )


def roc_auc(
    y_true: np.ndarray, scores: np.ndarray
) -> tuple[list[tuple[float, float, float]], float]:
    """ROC points from a descending sweep over distinct scores, plus
    trapezoidal AUC. Needs both classes present."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    if len(y_true) != len(scores):
        raise DataFormatError("labels and scores length mismatch")
    n_pos = int(np.sum(y_true == 1))
    n_neg = int(np.sum(y_true == 0))
    if n_pos == 0 or n_neg == 0:
        raise DataFormatError("ROC needs both classes present")
    order = np.argsort(-scores, kind="stable")
    y_sorted = y_true[order]
    s_sorted = scores[order]
    # cumulative counts after each score group (rows with equal score move together)
    distinct = np.flatnonzero(np.diff(s_sorted) != 0)
    group_ends = np.concatenate([distinct, [len(s_sorted) - 1]])
    tp_cum = np.cumsum(y_sorted == 1)[group_ends]
    fp_cum = np.cumsum(y_sorted == 0)[group_ends]
    points = [(0.0, 0.0, float("inf"))]
    for end, tp, fp in zip(group_ends, tp_cum, fp_cum):
        points.append((fp / n_neg, tp / n_pos, float(s_sorted[end])))
    auc = 0.0
    for (fpr0, tpr0, _), (fpr1, tpr1, _) in zip(points, points[1:]):
        auc += (fpr1 - fpr0) * (tpr1 + tpr0) / 2.0
    return points, float(auc)


def evaluate_predictions(
    y_true: np.ndarray, scores: np.ndarray, threshold: float = 0.5
) -> MetricsReport:
    """Full report: thresholded confusion metrics plus the ROC sweep."""
    y_pred = (np.asarray(scores) >= threshold).astype(np.int64)
    report = confusion_metrics(y_true, y_pred)
    report.roc, report.auc = roc_auc(y_true, scores)
    return report


# --- feature importance --------------------------------------------------------

def _model_scores(model, X: np.ndarray) -> np.ndarray:
    return np.asarray(model.predict_proba(X), dtype=np.float64)


def permutation_importance(
    model,
    X: np.ndarray,
    y: np.ndarray,
    repeats: int = 10,
    seed: int = 0,
) -> np.ndarray:
    """Signed mean AUC drop when each feature column is shuffled.

    Negative values are meaningful: permuting a noise column can raise AUC.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    base = roc_auc(y, _model_scores(model, X))[1]
    rng = np.random.default_rng(seed)
    out = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        drops = []
        for _ in range(repeats):
            Xp = X.copy()
            Xp[:, j] = Xp[rng.permutation(len(X)), j]
            drops.append(base - roc_auc(y, _model_scores(model, Xp))[1])
        out[j] = float(np.mean(drops))
    return out


def impurity_importance(model) -> np.ndarray:
    """Per-feature Gini-decrease totals, normalized to sum to 1.

    Works for a decision tree, a random forest, or a bagging ensemble of
    tree-based members; anything else is unsupported.
    """
    decrease = _impurity_decrease(model)
    total = decrease.sum()
    return decrease / total if total > 0 else decrease


def _impurity_decrease(model) -> np.ndarray:
    if hasattr(model, "impurity_decrease"):
        return np.asarray(model.impurity_decrease(), dtype=np.float64)
    members = getattr(model, "members", None)
    if members and all(hasattr(member, "impurity_decrease") for member in members):
        return np.mean([member.impurity_decrease() for member in members], axis=0)
    raise DataFormatError(
        f"impurity importance needs a tree-based model, not {type(model).__name__}"
    )


# --- chi-squared screening ------------------------------------------------------

# Upper 95% critical values of the chi-squared distribution, df 1..12.
CHI2_CRIT_95 = {
    1: 3.841,
    2: 5.991,
    3: 7.815,
    4: 9.488,
    5: 11.070,
    6: 12.592,
    7: 14.067,
    8: 15.507,
    9: 16.919,
    10: 18.307,
    11: 19.675,
    12: 21.026,
}


def chi_squared(
    column: np.ndarray, labels: np.ndarray, bins: int = 4
) -> tuple[float, int]:
    """Pearson chi-squared statistic between a (binned) feature and the label.

    Numeric features are cut at training quantiles (duplicate edges merged);
    values already in {0, 1} are used as-is. Bins that end up empty are
    dropped, which is how zero-expected cells get merged away. Returns
    (statistic, degrees of freedom); a feature constant after merging
    yields (0.0, 0).
    """
    column = np.asarray(column, dtype=np.float64)
    labels = np.asarray(labels)
    if len(column) != len(labels):
        raise DataFormatError("column and labels length mismatch")
    if len(np.unique(labels)) < 2:
        raise DataFormatError("chi-squared needs at least two label values")
    values = np.unique(column)
    if set(values.tolist()) <= {0.0, 1.0}:
        assignments = column.astype(np.int64)
        n_bins = 2
    else:
        qs = np.quantile(column, np.linspace(0, 1, bins + 1)[1:-1])
        edges = np.unique(qs)
        assignments = np.searchsorted(edges, column, side="right")
        n_bins = len(edges) + 1
    label_values = np.unique(labels)
    table = np.zeros((n_bins, len(label_values)))
    for c, lv in enumerate(label_values):
        rows = assignments[labels == lv]
        table[:, c] = np.bincount(rows, minlength=n_bins)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if table.shape[0] < 2 or table.shape[1] < 2:
        return 0.0, 0
    row_tot = table.sum(axis=1, keepdims=True)
    col_tot = table.sum(axis=0, keepdims=True)
    expected = row_tot @ col_tot / table.sum()
    stat = float(((table - expected) ** 2 / expected).sum())
    df = (table.shape[0] - 1) * (table.shape[1] - 1)
    return stat, df


def chi_squared_screen(
    X: np.ndarray, y: np.ndarray, bins: int = 4
) -> list[tuple[str, float, int]]:
    """(feature name, statistic, df) for every feature column."""
    X = np.asarray(X, dtype=np.float64)
    return [
        (name, *chi_squared(X[:, j], y, bins=bins))
        for j, name in enumerate(FEATURE_NAMES)
    ]


# --- rendering -------------------------------------------------------------------

def ascii_roc(points: list[tuple[float, float, float]], size: int = 21) -> str:
    """Small terminal sketch of a ROC curve (diagonal shown as '.')."""
    grid = [[" "] * size for _ in range(size)]
    for i in range(size):
        grid[size - 1 - i][i] = "."
    for fpr, tpr, _ in points:
        col = min(size - 1, int(round(fpr * (size - 1))))
        row = min(size - 1, int(round(tpr * (size - 1))))
        grid[size - 1 - row][col] = "*"
    lines = ["tpr"]
    lines += ["  |" + "".join(row) for row in grid]
    lines.append("  +" + "-" * size + " fpr")
    return "\n".join(lines)
