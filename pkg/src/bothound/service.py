"""HTTP annotation service backing the labeling UI.

Serves the feature rows under review, the per-account evidence
(profile, recent events, recent comments), and the label state machine.
Labels are appended to the journal through the dataset module's
single-writer store; everything else is read-only and safe to serve
concurrently. The built label-ui bundle, when present, is mounted at /.
"""
from __future__ import annotations

import csv
import io
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .dataset import BotCategory, Label, LabelStatus, LabelStore
from .events import AccountProfile, COMMENT_TYPES, Corpus, iso_utc, load_corpus
from .features import (
    CSV_COLUMNS,
    DEFAULT_LEXICON,
    FEATURE_NAMES,
    FeatureRow,
    SubstringLexicon,
    _fmt,
    read_features_csv,
)

MAX_EVENTS_SHOWN = 50
MAX_COMMENTS_SHOWN = 20


# --- wire models ---------------------------------------------------------------

class FeatureEntry(BaseModel):
    name: str
    value: float | int | None
    display: str  # exactly the CSV rendering; the UI shows this verbatim
    percentile: float


class ProfileView(BaseModel):
    login: str
    name: str | None = None
    bio: str | None = None
    email: str | None = None
    tag: str | None = None
    followers: int | None = None
    following: int | None = None


class EventView(BaseModel):
    occurred_at: str
    event_type: str
    repo_id: str
    thread_key: str | None = None
    has_comment: bool = False


class CommentView(BaseModel):
    occurred_at: str
    text: str


class LabelView(BaseModel):
    annotator: str
    value: str  # "bot" | "human"
    category: str | None = None
    decided_at: str


class AccountSummary(BaseModel):
    login: str
    status: str
    summary: dict[str, str]


class AccountListResponse(BaseModel):
    total: int
    offset: int
    limit: int
    accounts: list[AccountSummary]


class AccountDetail(BaseModel):
    login: str
    status: str
    profile: ProfileView
    features: list[FeatureEntry]
    lexicon_hits: dict[str, list[str]]
    labels: list[LabelView]
    events: list[EventView]
    comments: list[CommentView]


class LabelRequest(BaseModel):
    value: str = Field(pattern="^(bot|human)$")
    category: str | None = None
    annotator: str = Field(min_length=1)
    expected_status: str | None = None


class LabelResponse(BaseModel):
    login: str
    status: str


class ProgressReport(BaseModel):
    total: int
    counts: dict[str, int]


_SUMMARY_FEATURES = ["f_tag", "n_activity", "n_active_days", "median_response_time",
                     "comment_similarity", "periodicity"]


class AnnotationState:
    """Feature rows, evidence corpus, percentile tables, and the label store."""

    def __init__(
        self,
        rows: list[FeatureRow],
        store: LabelStore,
        corpus: Corpus | None = None,
        lexicon: SubstringLexicon = DEFAULT_LEXICON,
    ):
        self.rows = {row.login: row for row in rows}
        self.order = sorted(self.rows)
        self.store = store
        self.corpus = corpus
        self.lexicon = lexicon
        self._percentile_tables: dict[str, np.ndarray] = {}
        for name in FEATURE_NAMES:
            values = [
                getattr(row.features, name)
                for row in rows
                if getattr(row.features, name) is not None
            ]
            self._percentile_tables[name] = np.sort(np.asarray(values, dtype=np.float64))

    def percentile(self, name: str, value: float | None) -> float:
        table = self._percentile_tables[name]
        if value is None or len(table) == 0:
            return 0.0
        return float(np.searchsorted(table, value, side="right") / len(table))

    def feature_entries(self, row: FeatureRow) -> list[FeatureEntry]:
        entries = []
        for name in FEATURE_NAMES:
            value = getattr(row.features, name)
            entries.append(
                FeatureEntry(
                    name=name,
                    value=value,
                    display=_fmt(value),
                    percentile=self.percentile(name, value),
                )
            )
        return entries

    def lexicon_hits(self, login: str) -> dict[str, list[str]]:
        profile = self.profile_of(login)
        fields = {
            "login": profile.login,
            "name": profile.name,
            "bio": profile.bio,
            "email": profile.email,
        }
        hits: dict[str, list[str]] = {}
        for field_name, text in fields.items():
            lowered = (text or "").lower()
            hits[field_name] = [t for t in self.lexicon.terms if t and t in lowered]
        return hits

    def profile_of(self, login: str) -> AccountProfile:
        if self.corpus is not None and login in self.corpus.profiles:
            return self.corpus.profiles[login]
        return AccountProfile(login=login)

    def evidence(self, login: str) -> tuple[list[EventView], list[CommentView]]:
        if self.corpus is None or login not in self.corpus.timelines:
            return [], []
        events = self.corpus.timelines[login].events
        recent = events[-MAX_EVENTS_SHOWN:][::-1]
        views = [
            EventView(
                occurred_at=iso_utc(ev.occurred_at),
                event_type=ev.event_type.value,
                repo_id=ev.repo_id,
                thread_key=ev.thread_key,
                has_comment=ev.comment_text is not None,
            )
            for ev in recent
        ]
        comments = [
            CommentView(occurred_at=iso_utc(ev.occurred_at), text=ev.comment_text)
            for ev in reversed(events)
            if ev.event_type in COMMENT_TYPES and ev.comment_text is not None
        ][:MAX_COMMENTS_SHOWN]
        return views, comments

    def summary(self, row: FeatureRow) -> dict[str, str]:
        return {name: _fmt(getattr(row.features, name)) for name in _SUMMARY_FEATURES}


def build_state(
    features_path: str | Path,
    labels_path: str | Path,
    timelines_path: str | Path | None = None,
    lexicon: SubstringLexicon = DEFAULT_LEXICON,
) -> AnnotationState:
    rows = read_features_csv(features_path)
    corpus = load_corpus(timelines_path) if timelines_path else None
    store = LabelStore(labels_path, known_logins={row.login for row in rows})
    return AnnotationState(rows=rows, store=store, corpus=corpus, lexicon=lexicon)


def create_app(state: AnnotationState, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="bothound annotation service")

    @app.exception_handler(RequestValidationError)
    async def invalid_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def require_row(login: str) -> FeatureRow:
        row = state.rows.get(login)
        if row is None:
            raise HTTPException(status_code=404, detail=f"unknown login {login!r}")
        return row

    @app.get("/api/accounts", response_model=AccountListResponse)
    def list_accounts(status: str | None = None, offset: int = 0, limit: int = 50):
        if status is not None:
            try:
                wanted = LabelStatus(status)
            except ValueError:
                raise HTTPException(status_code=400, detail=f"unknown status {status!r}")
            logins = [l for l in state.order if state.store.status(l) is wanted]
        else:
            logins = state.order
        if offset < 0 or limit < 1:
            raise HTTPException(status_code=400, detail="offset/limit out of range")
        page = logins[offset : offset + limit]
        return AccountListResponse(
            total=len(logins),
            offset=offset,
            limit=limit,
            accounts=[
                AccountSummary(
                    login=login,
                    status=state.store.status(login).value,
                    summary=state.summary(state.rows[login]),
                )
                for login in page
            ],
        )

    @app.get("/api/accounts/{login}", response_model=AccountDetail)
    def account_detail(login: str):
        row = require_row(login)
        profile = state.profile_of(login)
        events, comments = state.evidence(login)
        labels = [
            LabelView(
                annotator=label.annotator,
                value="bot" if label.value == 1 else "human",
                category=label.category.value if label.category else None,
                decided_at=iso_utc(label.decided_at),
            )
            for label in state.store.labels_of(login)
        ]
        return AccountDetail(
            login=login,
            status=state.store.status(login).value,
            profile=ProfileView(
                login=profile.login,
                name=profile.name,
                bio=profile.bio,
                email=profile.email,
                tag=profile.tag.value,
                followers=profile.followers,
                following=profile.following,
            ),
            features=state.feature_entries(row),
            lexicon_hits=state.lexicon_hits(login),
            labels=labels,
            events=events,
            comments=comments,
        )

    @app.post("/api/accounts/{login}/label", response_model=LabelResponse)
    def post_label(login: str, body: LabelRequest):
        require_row(login)
        if body.expected_status is not None:
            current = state.store.status(login).value
            if body.expected_status != current:
                raise HTTPException(
                    status_code=409,
                    detail=f"status is {current!r}, not {body.expected_status!r}; refetch",
                )
        value = 1 if body.value == "bot" else 0
        category = None
        if body.category:
            if value != 1:
                raise HTTPException(status_code=400, detail="category requires a bot label")
            try:
                category = BotCategory(body.category)
            except ValueError:
                raise HTTPException(status_code=400, detail=f"unknown category {body.category!r}")
        label = Label(
            value=value,
            category=category,
            annotator=body.annotator,
            decided_at=int(time.time()),
        )
        try:
            status = state.store.record(login, label)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown login {login!r}")
        return LabelResponse(login=login, status=status.value)

    @app.get("/api/progress", response_model=ProgressReport)
    def progress():
        counts = state.store.counts(all_logins=set(state.rows))
        return ProgressReport(total=len(state.rows), counts=counts)

    @app.get("/api/export")
    def export():
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(CSV_COLUMNS)
        for login, value, category in state.store.export_rows():
            row = state.rows.get(login)
            if row is None:
                continue
            cells = [login]
            cells += [_fmt(getattr(row.features, name)) for name in FEATURE_NAMES]
            cells += [str(value), category or ""]
            writer.writerow(cells)
        return PlainTextResponse(buf.getvalue(), media_type="text/csv")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
