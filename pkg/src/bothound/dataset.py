"""Assemble, transform, balance, split, and label feature datasets.

Preprocessing is fit on a training partition and replayed elsewhere:
missing values take the training median, count features go through
log1p, and all numeric features are z-scored with training statistics
(population standard deviation). Binary flags pass through untouched.
"""
from __future__ import annotations

import csv
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .events import TimeWindow, iso_utc, parse_timestamp
from .features import (
    BINARY_FEATURES,
    COUNT_FEATURES,
    FEATURE_NAMES,
    FeatureRow,
    OPTIONAL_FEATURES,
)


class BotCategory(str, Enum):
    AUTOMATIC_COMMENTING = "AutomaticCommenting"
    CICD = "CICD"
    WORKFLOW = "Workflow"
    SCANNING = "Scanning"


class LabelStatus(str, Enum):
    UNLABELED = "unlabeled"
    PENDING = "pending"
    CONFLICT = "conflict"
    CONFIRMED = "confirmed"


@dataclass(frozen=True)
class Label:
    value: int  # 0 = human, 1 = bot
    category: BotCategory | None = None
    annotator: str = ""
    decided_at: int = 0  # epoch seconds

    def __post_init__(self) -> None:
        if self.value not in (0, 1):
            raise DataFormatError("label value must be 0 or 1")
        if self.category is not None and self.value != 1:
            raise DataFormatError("category only applies to bot labels")


@dataclass
class LabeledDataset:
    rows: list[FeatureRow]
    imputation: dict = field(default_factory=dict)
    window: TimeWindow | None = None

    def __post_init__(self) -> None:
        logins = [r.login for r in self.rows]
        if len(set(logins)) != len(logins):
            raise DataFormatError("dataset logins must be unique")

    def matrix(self) -> np.ndarray:
        """(n, 17) float matrix; missing values as NaN."""
        if not self.rows:
            return np.empty((0, len(FEATURE_NAMES)))
        return np.stack([r.features.as_array() for r in self.rows])

    def labels(self) -> np.ndarray:
        """(n,) int labels; raises if any row is unlabeled."""
        out = np.empty(len(self.rows), dtype=np.int64)
        for i, row in enumerate(self.rows):
            if row.label is None:
                raise DataFormatError(f"row {row.login!r} has no label")
            out[i] = row.label
        return out

    def labeled_only(self) -> "LabeledDataset":
        return LabeledDataset(
            rows=[r for r in self.rows if r.label is not None],
            imputation=dict(self.imputation),
            window=self.window,
        )

    @property
    def logins(self) -> list[str]:
        return [r.login for r in self.rows]

    def class_counts(self) -> tuple[int, int]:
        humans = sum(1 for r in self.rows if r.label == 0)
        bots = sum(1 for r in self.rows if r.label == 1)
        return humans, bots


_LOG1P_IDX = [i for i, n in enumerate(FEATURE_NAMES) if n in COUNT_FEATURES]
_BINARY_IDX = [i for i, n in enumerate(FEATURE_NAMES) if n in BINARY_FEATURES]
_NUMERIC_IDX = [i for i in range(len(FEATURE_NAMES)) if i not in _BINARY_IDX]
_OPTIONAL_IDX = [i for i, n in enumerate(FEATURE_NAMES) if n in OPTIONAL_FEATURES]


class Preprocessor:
    """Imputation + log1p + z-score, fit once and replayed at prediction time."""

    def __init__(self) -> None:
        self.fill: dict[int, float] = {}
        self.mean: np.ndarray | None = None
        self.std: np.ndarray | None = None

    def fit(self, X: np.ndarray) -> "Preprocessor":
        X = np.asarray(X, dtype=np.float64)
        self.fill = {}
        for j in _OPTIONAL_IDX:
            col = X[:, j]
            present = col[~np.isnan(col)]
            # a feature missing everywhere falls back to 0, recorded as such
            self.fill[j] = float(np.median(present)) if present.size else 0.0
        Xt = self._impute_log(X)
        mean = np.zeros(X.shape[1])
        std = np.ones(X.shape[1])
        if len(Xt):
            mean[_NUMERIC_IDX] = Xt[:, _NUMERIC_IDX].mean(axis=0)
            sd = Xt[:, _NUMERIC_IDX].std(axis=0)  # population sigma
            std[_NUMERIC_IDX] = np.where(sd > 0, sd, 1.0)
        self.mean = mean
        self.std = std
        return self

    def _impute_log(self, X: np.ndarray) -> np.ndarray:
        Xt = X.astype(np.float64, copy=True)
        for j, value in self.fill.items():
            col = Xt[:, j]
            col[np.isnan(col)] = value
        Xt[:, _LOG1P_IDX] = np.log1p(Xt[:, _LOG1P_IDX])
        return Xt

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.mean is None or self.std is None:
            raise DataFormatError("preprocessor not fitted")
        Xt = self._impute_log(np.asarray(X, dtype=np.float64))
        Xt[:, _NUMERIC_IDX] = (Xt[:, _NUMERIC_IDX] - self.mean[_NUMERIC_IDX]) / self.std[
            _NUMERIC_IDX
        ]
        return Xt

    def fit_transform(self, X: np.ndarray) -> np.ndarray:
        return self.fit(X).transform(X)

    def to_dict(self) -> dict:
        if self.mean is None or self.std is None:
            raise DataFormatError("preprocessor not fitted")
        return {
            "fill": {FEATURE_NAMES[j]: v for j, v in sorted(self.fill.items())},
            "log1p": [FEATURE_NAMES[j] for j in _LOG1P_IDX],
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Preprocessor":
        pp = cls()
        pp.fill = {FEATURE_NAMES.index(name): float(v) for name, v in doc["fill"].items()}
        pp.mean = np.asarray(doc["mean"], dtype=np.float64)
        pp.std = np.asarray(doc["std"], dtype=np.float64)
        return pp


def impute_and_transform(dataset: LabeledDataset) -> tuple[np.ndarray, Preprocessor]:
    """Fit preprocessing on the dataset's labeled rows and apply it to all rows.

    Returns the transformed matrix plus the fitted preprocessor; the
    parameter record is also stored on ``dataset.imputation``.
    """
    labeled = dataset.labeled_only()
    fit_X = labeled.matrix() if labeled.rows else dataset.matrix()
    pp = Preprocessor().fit(fit_X)
    dataset.imputation = pp.to_dict()
    return pp.transform(dataset.matrix()), pp


def undersample_indices(y: np.ndarray, seed: int) -> np.ndarray:
    """Row indices after downsampling the majority class to minority size.

    Sampling is uniform without replacement; surviving rows keep their
    original order. Deterministic under a fixed seed.
    """
    y = np.asarray(y)
    n_human = int(np.sum(y == 0))
    n_bot = int(np.sum(y == 1))
    if n_human == 0 or n_bot == 0:
        raise DataFormatError("undersampling needs both classes present")
    majority = 0 if n_human > n_bot else 1
    target = min(n_human, n_bot)
    maj_idx = np.flatnonzero(y == majority)
    min_idx = np.flatnonzero(y != majority)
    rng = np.random.default_rng(seed)
    kept_maj = rng.choice(maj_idx, size=target, replace=False)
    return np.sort(np.concatenate([kept_maj, min_idx]))


def undersample(dataset: LabeledDataset, seed: int) -> LabeledDataset:
    labeled = dataset.labeled_only()
    idx = undersample_indices(labeled.labels(), seed)
    return LabeledDataset(
        rows=[labeled.rows[i] for i in idx],
        imputation=dict(dataset.imputation),
        window=dataset.window,
    )


def stratified_split(
    dataset: LabeledDataset, test_fraction: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Disjoint train/test partition with per-class proportions within one row
    of exact stratification."""
    if not (0.0 < test_fraction < 1.0):
        raise DataFormatError("test_fraction must be in (0, 1)")
    labeled = dataset.labeled_only()
    y = labeled.labels()
    rng = np.random.default_rng(seed)
    test_idx: list[int] = []
    for cls in (0, 1):
        cls_idx = np.flatnonzero(y == cls)
        if len(cls_idx) < 2:
            raise DataFormatError(f"class {cls} has fewer than 2 rows")
        n_test = int(round(len(cls_idx) * test_fraction))
        n_test = min(max(n_test, 1), len(cls_idx) - 1)
        picked = rng.permutation(cls_idx)[:n_test]
        test_idx.extend(int(i) for i in picked)
    test_set = set(test_idx)
    train_rows = [r for i, r in enumerate(labeled.rows) if i not in test_set]
    test_rows = [r for i, r in enumerate(labeled.rows) if i in test_set]
    meta = dict(dataset.imputation)
    return (
        LabeledDataset(rows=train_rows, imputation=meta, window=dataset.window),
        LabeledDataset(rows=test_rows, imputation=dict(meta), window=dataset.window),
    )


# --- ground-truth label files --------------------------------------------------

LABELS_COLUMNS = ["login", "value", "category", "annotator", "decided_at"]


def read_labels_csv(path: str | Path) -> dict[str, tuple[int, str | None]]:
    """Read a ground-truth labels CSV into {login: (value, category)}.

    Later rows win, matching the journal's replace-on-relabel rule.
    """
    out: dict[str, tuple[int, str | None]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != LABELS_COLUMNS:
            raise DataFormatError(f"labels CSV must have header {','.join(LABELS_COLUMNS)}")
        for row in reader:
            value = int(row["value"])
            if value not in (0, 1):
                raise DataFormatError(f"label value must be 0/1: {row!r}")
            category = row["category"] or None
            if category is not None:
                BotCategory(category)  # validates
            out[row["login"]] = (value, category)
    return out


def apply_labels(rows: list[FeatureRow], labels: dict[str, tuple[int, str | None]]) -> int:
    """Fill label/category on matching rows in place; returns rows labeled."""
    hit = 0
    for row in rows:
        if row.login in labels:
            row.label, row.category = labels[row.login]
            hit += 1
    return hit


# --- annotation store ----------------------------------------------------------

class LabelStore:
    """Dual-annotation label state machine backed by an append-only CSV journal.

    One label per annotator per account (relabeling replaces). Status is
    derived from the current labels: one label -> pending, two agreeing ->
    confirmed, two disagreeing -> conflict, three or more -> strict
    majority confirms, exact tie stays in conflict. Writes are serialized
    through a lock; reads are safe concurrently.
    """

    def __init__(self, journal_path: str | Path, known_logins: set[str] | None = None):
        self._path = Path(journal_path)
        self._lock = threading.Lock()
        self._known = known_logins
        self._labels: dict[str, dict[str, Label]] = {}
        if self._path.exists():
            self._replay()

    def _replay(self) -> None:
        with open(self._path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return
            if [c.strip() for c in reader.fieldnames] != LABELS_COLUMNS:
                raise DataFormatError(
                    f"label journal must have header {','.join(LABELS_COLUMNS)}"
                )
            for row in reader:
                label = Label(
                    value=int(row["value"]),
                    category=BotCategory(row["category"]) if row["category"] else None,
                    annotator=row["annotator"],
                    decided_at=parse_timestamp(row["decided_at"]),
                )
                self._labels.setdefault(row["login"], {})[label.annotator] = label

    def record(self, login: str, label: Label) -> LabelStatus:
        """Append a label; same annotator relabeling replaces their prior one."""
        if not label.annotator:
            raise DataFormatError("label must carry a non-empty annotator")
        with self._lock:
            if self._known is not None and login not in self._known:
                raise KeyError(login)
            self._labels.setdefault(login, {})[label.annotator] = label
            new_file = not self._path.exists()
            with open(self._path, "a", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                if new_file:
                    writer.writerow(LABELS_COLUMNS)
                writer.writerow(
                    [
                        login,
                        label.value,
                        label.category.value if label.category else "",
                        label.annotator,
                        iso_utc(label.decided_at),
                    ]
                )
            return self.status(login)

    def labels_of(self, login: str) -> list[Label]:
        return sorted(self._labels.get(login, {}).values(), key=lambda l: (l.decided_at, l.annotator))

    def status(self, login: str) -> LabelStatus:
        labels = list(self._labels.get(login, {}).values())
        if not labels:
            return LabelStatus.UNLABELED
        if len(labels) == 1:
            return LabelStatus.PENDING
        votes = sum(l.value for l in labels)
        if votes * 2 == len(labels):
            return LabelStatus.CONFLICT
        return LabelStatus.CONFIRMED

    def decision(self, login: str) -> tuple[int, BotCategory | None] | None:
        """Majority value and category for a confirmed account, else None."""
        if self.status(login) is not LabelStatus.CONFIRMED:
            return None
        labels = self.labels_of(login)
        votes = sum(l.value for l in labels)
        value = int(votes * 2 > len(labels))
        category = None
        if value == 1:
            for label in labels:
                if label.value == 1 and label.category is not None:
                    category = label.category
                    break
        return value, category

    def confirmed(self) -> list[tuple[str, int, BotCategory | None]]:
        out = []
        for login in sorted(self._labels):
            decided = self.decision(login)
            if decided is not None:
                out.append((login, decided[0], decided[1]))
        return out

    def counts(self, all_logins: set[str] | None = None) -> dict[str, int]:
        logins = set(self._labels)
        if all_logins is not None:
            logins |= all_logins
        counts = {status.value: 0 for status in LabelStatus}
        for login in logins:
            counts[self.status(login).value] += 1
        return counts

    def export_rows(self) -> list[tuple[str, int, str | None]]:
        """Only CONFIRMED accounts, as (login, value, category-name) tuples."""
        return [
            (login, value, category.value if category else None)
            for login, value, category in self.confirmed()
        ]
