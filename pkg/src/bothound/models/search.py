"""Cross-validated training: stratified folds, grid search, repeats.

Every (combination, repeat, fold) cell is an independent work unit —
undersampling and preprocessing are fit inside the training part of the
fold, never on the held-out part — so cells can run in parallel processes
and still aggregate deterministically.
"""
from __future__ import annotations

import itertools
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..dataset import Preprocessor, undersample_indices
from ..errors import DataFormatError
from ..evaluation import confusion_metrics, roc_auc
from .bagging import DEFAULT_MEMBERS, DEFAULT_THRESHOLD, fit_base, fit_bagging

# Default hyperparameter grid for the forest base; kept small enough for
# desk-scale runs (minutes, not hours).
DEFAULT_GRID = {
    "max_depth": [8, 16, None],
    "min_samples_leaf": [1, 5],
    "n_trees": [50, 100],
}

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "forest": DEFAULT_GRID,
    "tree": {"max_depth": [8, 16, None], "min_samples_leaf": [1, 5]},
    "logreg": {"l2_lambda": [0.001, 0.01, 0.1]},
    "gnb": {"variance_floor_ratio": [1e-9]},
    "knn": {"k": [3, 5, 9]},
}

METRIC_NAMES = ["accuracy", "precision", "recall", "f1", "auc"]

_FOLD_STAGE, _UNDER_STAGE, _MODEL_STAGE = 101, 202, 303


def derive_seed(*keys: int) -> int:
    """Stable child seed from a tuple of integer keys."""
    return int(np.random.SeedSequence(list(keys)).generate_state(1, dtype=np.uint64)[0])


def _params_key(params: dict) -> int:
    """Stable integer fingerprint of a parameter combination, so a combo's
    CV cells do not depend on what else is in the grid."""
    return zlib.crc32(json.dumps(params, sort_keys=True, default=repr).encode())


def stratified_folds(y: np.ndarray, n_folds: int, seed: int) -> list[np.ndarray]:
    """Partition row indices into n_folds folds with per-class balance.

    Every fold must keep both classes; raises otherwise.
    """
    y = np.asarray(y)
    if n_folds < 2:
        raise DataFormatError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in np.unique(y):
        cls_idx = rng.permutation(np.flatnonzero(y == cls))
        if len(cls_idx) < n_folds:
            raise DataFormatError(
                f"class {cls} has {len(cls_idx)} rows; cannot fill {n_folds} folds"
            )
        for k, chunk in enumerate(np.array_split(cls_idx, n_folds)):
            folds[k].extend(int(i) for i in chunk)
    return [np.sort(np.asarray(fold, dtype=np.int64)) for fold in folds]


def iter_grid(grid: dict[str, list]) -> list[dict]:
    """All parameter combinations, in the grid's declared order."""
    if not grid:
        raise DataFormatError("parameter grid must be non-empty")
    keys = list(grid)
    combos = []
    for values in itertools.product(*(grid[k] for k in keys)):
        combos.append(dict(zip(keys, values)))
    return combos


def _prune_params(base_kind: str, params: dict) -> dict:
    """Drop grid keys a base kind does not accept (n_trees on a bare tree)."""
    if base_kind == "tree":
        return {k: v for k, v in params.items() if k != "n_trees"}
    return dict(params)


def _run_unit(args: tuple) -> dict[str, float]:
    (
        X,
        y,
        base_kind,
        params,
        m,
        threshold,
        train_idx,
        test_idx,
        under_seed,
        model_seed,
        use_undersampling,
    ) = args
    X_train_raw, y_train = X[train_idx], y[train_idx]
    X_test_raw, y_test = X[test_idx], y[test_idx]
    pp = Preprocessor().fit(X_train_raw)
    X_train = pp.transform(X_train_raw)
    X_test = pp.transform(X_test_raw)
    if use_undersampling:
        keep = undersample_indices(y_train, under_seed)
        X_train, y_train = X_train[keep], y_train[keep]
    if m is None:
        model = fit_base(base_kind, params, X_train, y_train, model_seed)
        scores = model.predict_proba(X_test)
        y_pred = (scores >= threshold).astype(np.int64)
    else:
        model = fit_bagging(
            X_train, y_train, base_kind, params, m=m, seed=model_seed, threshold=threshold
        )
        y_pred, scores = model.predict(X_test)
    report = confusion_metrics(y_test, y_pred)
    _, auc = roc_auc(y_test, scores)
    return {
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "auc": auc,
    }


def _run_units(units: list[tuple], n_jobs: int) -> list[dict[str, float]]:
    if n_jobs <= 1 or len(units) <= 1:
        return [_run_unit(u) for u in units]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_run_unit, units, chunksize=max(1, len(units) // (4 * n_jobs))))


def _make_units(
    X: np.ndarray,
    y: np.ndarray,
    base_kind: str,
    combos: list[dict],
    folds: int,
    repeats: int,
    seed: int,
    m: int | None,
    threshold: float,
    use_undersampling: bool,
) -> list[tuple]:
    units = []
    for repeat in range(repeats):
        fold_idx = stratified_folds(y, folds, derive_seed(seed, _FOLD_STAGE, repeat))
        all_idx = np.arange(len(y))
        for k, test_idx in enumerate(fold_idx):
            train_idx = np.setdiff1d(all_idx, test_idx)
            under_seed = derive_seed(seed, _UNDER_STAGE, repeat, k)
            for params in combos:
                pruned = _prune_params(base_kind, params)
                units.append(
                    (
                        X,
                        y,
                        base_kind,
                        pruned,
                        m,
                        threshold,
                        train_idx,
                        test_idx,
                        under_seed,
                        derive_seed(seed, _MODEL_STAGE, _params_key(pruned), repeat, k),
                        use_undersampling,
                    )
                )
    return units


@dataclass
class CVResult:
    """Mean and standard deviation of each metric over all fold evaluations."""

    mean: dict[str, float]
    sd: dict[str, float]
    n_evaluations: int


@dataclass
class GridSearchResult:
    best_params: dict
    best_index: int
    table: list[dict] = field(default_factory=list)  # one row per combination

    @property
    def best_row(self) -> dict:
        return self.table[self.best_index]


def _aggregate(metrics: list[dict[str, float]]) -> CVResult:
    mean = {}
    sd = {}
    for name in METRIC_NAMES:
        values = np.array([m[name] for m in metrics], dtype=np.float64)
        mean[name] = float(values.mean())
        sd[name] = float(values.std())
    return CVResult(mean=mean, sd=sd, n_evaluations=len(metrics))


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    base_kind: str,
    params: dict,
    folds: int = 5,
    repeats: int = 1,
    seed: int = 0,
    m: int | None = DEFAULT_MEMBERS,
    threshold: float = DEFAULT_THRESHOLD,
    undersampling: bool = True,
    n_jobs: int = 1,
) -> CVResult:
    """Repeated stratified-CV evaluation of one configuration.

    ``m=None`` evaluates the bare base model instead of a bagged ensemble.
    ``X`` is the raw feature matrix; imputation and scaling are fit inside
    each training fold.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    units = _make_units(
        X, y, base_kind, [dict(params)], folds, repeats, seed, m, threshold, undersampling
    )
    return _aggregate(_run_units(units, n_jobs))


def grid_search_cv(
    X: np.ndarray,
    y: np.ndarray,
    base_kind: str,
    grid: dict[str, list] | None = None,
    folds: int = 5,
    repeats: int = 5,
    seed: int = 0,
    m: int | None = DEFAULT_MEMBERS,
    threshold: float = DEFAULT_THRESHOLD,
    undersampling: bool = True,
    n_jobs: int = 1,
) -> GridSearchResult:
    """Evaluate every parameter combination with repeated stratified CV.

    The winner has the highest mean AUC; ties break by higher mean F1,
    then by position in the grid.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    combos = iter_grid(grid if grid is not None else DEFAULT_GRID)
    units = _make_units(
        X, y, base_kind, combos, folds, repeats, seed, m, threshold, undersampling
    )
    results = _run_units(units, n_jobs)
    # units were built with the combination as the innermost loop
    per_combo: list[list[dict[str, float]]] = [[] for _ in combos]
    for i, metrics in enumerate(results):
        per_combo[i % len(combos)].append(metrics)
    table = []
    for params, metrics in zip(combos, per_combo):
        agg = _aggregate(metrics)
        row = {"params": params}
        row.update({f"mean_{k}": v for k, v in agg.mean.items()})
        row.update({f"sd_{k}": v for k, v in agg.sd.items()})
        table.append(row)
    best_index = 0
    for i in range(1, len(table)):
        a, b = table[i], table[best_index]
        if (a["mean_auc"], a["mean_f1"]) > (b["mean_auc"], b["mean_f1"]):
            best_index = i
    return GridSearchResult(
        best_params=_prune_params(base_kind, combos[best_index]),
        best_index=best_index,
        table=table,
    )
