"""Compute the 17-dimensional behavioral feature vector of one account.

Five profile flags, two social counts, six activity counts, median
response time, connection count, mean pairwise comment similarity, and
an activity-periodicity score. Missing values (median response time and
comment similarity can be undefined) are represented as None and imputed
downstream, never as 0.
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from statistics import median
from typing import Iterable

import numpy as np

from .errors import DataFormatError, InvariantError
from .events import (
    AccountProfile,
    AccountTag,
    AccountTimeline,
    COMMENT_TYPES,
    EventType,
    ThreadIndex,
    TimeWindow,
    day_index,
)

# Substrings observed in bot profile text; configurable, matched case-insensitively.
DEFAULT_LEXICON_TERMS = ("bot", "auto", "ci", "cla", "code", "io", "logic", "assist")

FEATURE_NAMES = [
    "f_login",
    "f_name",
    "f_bio",
    "f_email",
    "f_tag",
    "n_following",
    "n_followers",
    "n_activity",
    "n_issues",
    "n_pull_requests",
    "n_repositories",
    "n_commits",
    "n_active_days",
    "median_response_time",
    "n_connection_accounts",
    "comment_similarity",
    "periodicity",
]

BINARY_FEATURES = frozenset({"f_login", "f_name", "f_bio", "f_email", "f_tag"})
COUNT_FEATURES = frozenset(
    {
        "n_following",
        "n_followers",
        "n_activity",
        "n_issues",
        "n_pull_requests",
        "n_repositories",
        "n_commits",
        "n_active_days",
        "n_connection_accounts",
    }
)
# Features that may be missing (no qualifying observations for the account).
OPTIONAL_FEATURES = frozenset({"median_response_time", "comment_similarity"})

MAX_SIMILARITY_COMMENTS = 100
PERIODICITY_MAX_LAG = 30
PERIODICITY_MIN_SPAN_DAYS = 14

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


class SimilarityAlgorithm(str, Enum):
    JACCARD = "jaccard"
    COSINE = "cosine"
    TFIDF = "tfidf"


@dataclass(frozen=True)
class SubstringLexicon:
    terms: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise DataFormatError("lexicon must be non-empty")
        for term in self.terms:
            if not term or term != term.lower():
                raise DataFormatError(f"lexicon terms must be lowercase: {term!r}")


DEFAULT_LEXICON = SubstringLexicon(DEFAULT_LEXICON_TERMS)


@dataclass
class FeatureVector:
    f_login: int
    f_name: int
    f_bio: int
    f_email: int
    f_tag: int
    n_following: int
    n_followers: int
    n_activity: int
    n_issues: int
    n_pull_requests: int
    n_repositories: int
    n_commits: int
    n_active_days: int
    median_response_time: float | None
    n_connection_accounts: int
    comment_similarity: float | None
    periodicity: float

    def __post_init__(self) -> None:
        for name in BINARY_FEATURES:
            if getattr(self, name) not in (0, 1):
                raise InvariantError(f"{name} must be 0 or 1")
        for name in COUNT_FEATURES:
            if getattr(self, name) < 0:
                raise InvariantError(f"{name} must be >= 0")
        if self.median_response_time is not None and self.median_response_time < 0:
            raise InvariantError("median_response_time must be >= 0")
        if self.comment_similarity is not None and not (0.0 <= self.comment_similarity <= 1.0):
            raise InvariantError("comment_similarity must be in [0, 1]")
        if not (0.0 <= self.periodicity <= 1.0):
            raise InvariantError("periodicity must be in [0, 1]")

    def as_array(self) -> np.ndarray:
        """17-slot float vector; missing values become NaN."""
        values = []
        for name in FEATURE_NAMES:
            v = getattr(self, name)
            values.append(np.nan if v is None else float(v))
        return np.array(values, dtype=np.float64)


# --- individual features -----------------------------------------------------

def profile_flag(text: str | None, lexicon: SubstringLexicon = DEFAULT_LEXICON) -> int:
    """1 iff the lowercased text contains any lexicon term as a substring."""
    if text is None:
        return 0
    lowered = text.lower()
    return int(any(term in lowered for term in lexicon.terms))


def tag_flag(profile: AccountProfile) -> int:
    return int(profile.tag is AccountTag.BOT)


def activity_counts(timeline: AccountTimeline) -> tuple[int, int, int, int, int, int]:
    """(n_activity, n_issues, n_pull_requests, n_repositories, n_commits, n_active_days)."""
    n_issues = 0
    n_prs = 0
    n_commits = 0
    repos: set[str] = set()
    days: set[int] = set()
    for ev in timeline.events:
        repos.add(ev.repo_id)
        days.add(day_index(ev.occurred_at))
        if ev.event_type in (EventType.ISSUE_OPEN, EventType.ISSUE_COMMENT):
            n_issues += 1
        elif ev.event_type in (
            EventType.PULL_REQUEST_OPEN,
            EventType.PULL_REQUEST_COMMENT,
            EventType.PULL_REQUEST_MERGE,
        ):
            n_prs += 1
        elif ev.event_type is EventType.PUSH:
            n_commits += ev.commit_count
    return len(timeline.events), n_issues, n_prs, len(repos), n_commits, len(days)


def median_response_time(login: str, threads: ThreadIndex) -> float | None:
    """Median gap between the account's thread events and the event just before
    them in the same thread (any actor, including the account itself).

    Events that open their thread contribute nothing; no qualifying gap
    at all yields None.
    """
    deltas: list[int] = []
    for key in sorted(threads.threads_of(login)):
        evs = threads.events_in(key)
        for i in range(1, len(evs)):
            if evs[i].actor_login == login:
                delta = evs[i].occurred_at - evs[i - 1].occurred_at
                if delta < 0:
                    raise InvariantError(f"unsorted thread {key}")
                deltas.append(delta)
    if not deltas:
        return None
    return float(median(deltas))


def connection_accounts(login: str, threads: ThreadIndex) -> int:
    """Distinct other actors sharing any issue/PR thread with the account."""
    others: set[str] = set()
    for key in threads.threads_of(login):
        for ev in threads.events_in(key):
            if ev.actor_login != login:
                others.add(ev.actor_login)
    return len(others)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop empty tokens."""
    return [tok for tok in _TOKEN_SPLIT.split(text.lower()) if tok]


def _pair_cosine(a: dict[str, float], b: dict[str, float]) -> float:
    """Cosine of sparse vectors; two zero vectors count as identical (1.0).

    The denominator uses one sqrt of the squared-norm product so identical
    vectors score exactly 1.0.
    """
    na2 = sum(v * v for v in a.values())
    nb2 = sum(v * v for v in b.values())
    if na2 == 0.0 and nb2 == 0.0:
        return 1.0
    if na2 == 0.0 or nb2 == 0.0:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(v * b[t] for t, v in a.items() if t in b)
    return dot / math.sqrt(na2 * nb2)


def comment_similarity(
    comments: list[str],
    algorithm: SimilarityAlgorithm = SimilarityAlgorithm.TFIDF,
) -> float | None:
    """Mean pairwise similarity over the account's most recent <=100 comments.

    jaccard: token-set overlap / union. cosine: raw term-frequency cosine.
    tfidf: cosine of tf * ln(N/df) vectors with document frequency taken
    over exactly these comments. Templated comments whose shared tokens
    appear in every comment get zero idf weight, so under tfidf two
    comments distinguished only by weightless tokens compare as identical.
    Fewer than two comments -> None.
    """
    docs = comments[:MAX_SIMILARITY_COMMENTS]
    n = len(docs)
    if n < 2:
        return None
    token_lists = [tokenize(doc) for doc in docs]

    if algorithm is SimilarityAlgorithm.JACCARD:
        sets = [set(toks) for toks in token_lists]
        total = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                union = sets[i] | sets[j]
                if not union:
                    total += 1.0
                else:
                    total += len(sets[i] & sets[j]) / len(union)
        return _clip01(total / (n * (n - 1) / 2))

    counts: list[dict[str, float]] = []
    for toks in token_lists:
        c: dict[str, float] = {}
        for tok in toks:
            c[tok] = c.get(tok, 0.0) + 1.0
        counts.append(c)

    if algorithm is SimilarityAlgorithm.TFIDF:
        df: dict[str, int] = {}
        for c in counts:
            for tok in c:
                df[tok] = df.get(tok, 0) + 1
        idf = {tok: math.log(n / d) for tok, d in df.items()}
        counts = [
            {tok: tf * idf[tok] for tok, tf in c.items() if idf[tok] != 0.0}
            for c in counts
        ]

    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += _pair_cosine(counts[i], counts[j])
    return _clip01(total / (n * (n - 1) / 2))


def _clip01(x: float) -> float:
    return min(1.0, max(0.0, x))


def daily_series(timeline: AccountTimeline, window: TimeWindow) -> np.ndarray:
    """Event count per UTC calendar day across the whole window."""
    first = day_index(window.start)
    series = np.zeros(window.n_days, dtype=np.float64)
    for ev in timeline.events:
        series[day_index(ev.occurred_at) - first] += 1.0
    return series


def periodicity(timeline: AccountTimeline, window: TimeWindow) -> float:
    """Largest positive normalized autocorrelation of the daily activity
    series at lags 1..30 days, clipped to [0, 1].

    Accounts whose events span fewer than 14 days, or whose daily series
    has zero variance, score 0.
    """
    if not timeline.events:
        return 0.0
    days = [day_index(ev.occurred_at) for ev in timeline.events]
    if max(days) - min(days) < PERIODICITY_MIN_SPAN_DAYS:
        return 0.0
    series = daily_series(timeline, window)
    centered = series - series.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0.0:
        return 0.0
    best = 0.0
    max_lag = min(PERIODICITY_MAX_LAG, len(centered) - 1)
    for lag in range(1, max_lag + 1):
        r = float(np.dot(centered[:-lag], centered[lag:])) / denom
        if r > best:
            best = r
    return _clip01(best)


def account_comments(timeline: AccountTimeline) -> list[str]:
    """The account's thread comments, most recent first, capped at 100."""
    texts = [
        ev.comment_text
        for ev in timeline.events
        if ev.event_type in COMMENT_TYPES and ev.comment_text is not None
    ]
    return texts[::-1][:MAX_SIMILARITY_COMMENTS]


def extract(
    timeline: AccountTimeline,
    profile: AccountProfile,
    threads: ThreadIndex,
    lexicon: SubstringLexicon = DEFAULT_LEXICON,
    algorithm: SimilarityAlgorithm = SimilarityAlgorithm.TFIDF,
) -> FeatureVector:
    """Assemble all 17 features for one account. Pure and deterministic."""
    if timeline.login != profile.login:
        raise DataFormatError(
            f"timeline/profile login mismatch: {timeline.login!r} vs {profile.login!r}"
        )
    n_activity, n_issues, n_prs, n_repos, n_commits, n_days = activity_counts(timeline)
    return FeatureVector(
        f_login=profile_flag(profile.login, lexicon),
        f_name=profile_flag(profile.name, lexicon),
        f_bio=profile_flag(profile.bio, lexicon),
        f_email=profile_flag(profile.email, lexicon),
        f_tag=tag_flag(profile),
        n_following=profile.following,
        n_followers=profile.followers,
        n_activity=n_activity,
        n_issues=n_issues,
        n_pull_requests=n_prs,
        n_repositories=n_repos,
        n_commits=n_commits,
        n_active_days=n_days,
        median_response_time=median_response_time(timeline.login, threads),
        n_connection_accounts=connection_accounts(timeline.login, threads),
        comment_similarity=comment_similarity(account_comments(timeline), algorithm),
        periodicity=periodicity(timeline, timeline.window),
    )


# --- the feature CSV ---------------------------------------------------------

CSV_COLUMNS = ["login"] + FEATURE_NAMES + ["label", "category"]


@dataclass
class FeatureRow:
    login: str
    features: FeatureVector
    label: int | None = None
    category: str | None = None


def _fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and value.is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(value) if isinstance(value, float) else str(value)


def write_features_csv(rows: Iterable[FeatureRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            record = [row.login]
            for name in FEATURE_NAMES:
                record.append(_fmt(getattr(row.features, name)))
            record.append("" if row.label is None else str(row.label))
            record.append(row.category or "")
            writer.writerow(record)


def read_features_csv(path: str | Path) -> list[FeatureRow]:
    rows: list[FeatureRow] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_COLUMNS:
            raise DataFormatError(
                f"feature CSV header mismatch in {path}; expected {','.join(CSV_COLUMNS)}"
            )
        seen: set[str] = set()
        for record in reader:
            if len(record) != len(CSV_COLUMNS):
                raise DataFormatError(f"bad feature CSV row width in {path}: {record!r}")
            login = record[0]
            if login in seen:
                raise DataFormatError(f"duplicate login {login!r} in {path}")
            seen.add(login)
            kwargs: dict[str, float | int | None] = {}
            for name, cell in zip(FEATURE_NAMES, record[1 : 1 + len(FEATURE_NAMES)]):
                if cell == "":
                    if name not in OPTIONAL_FEATURES:
                        raise DataFormatError(f"feature {name} missing for {login!r}")
                    kwargs[name] = None
                elif name in OPTIONAL_FEATURES or name == "periodicity":
                    kwargs[name] = float(cell)
                else:
                    kwargs[name] = int(cell)
            label_cell, category_cell = record[-2], record[-1]
            label = None if label_cell == "" else int(label_cell)
            if label not in (None, 0, 1):
                raise DataFormatError(f"label must be 0/1, got {label_cell!r}")
            rows.append(
                FeatureRow(
                    login=login,
                    features=FeatureVector(**kwargs),  # type: ignore[arg-type]
                    label=label,
                    category=category_cell or None,
                )
            )
    return rows
