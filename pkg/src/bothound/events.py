"""Parse, filter, and index platform event archives into per-account timelines.

Archives are line-delimited JSON in the GH-Archive hourly-file shape
(one object per line with ``type``, ``actor.login``, ``repo.id``,
``created_at``, ``payload``). Plain text and gzip files are both accepted.
"""
from __future__ import annotations

import csv
import gzip
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, TextIO

from .errors import CorruptArchiveError, DataFormatError

FORMAT_VERSION = 1


class EventType(str, Enum):
    ISSUE_OPEN = "IssueOpen"
    ISSUE_COMMENT = "IssueComment"
    PULL_REQUEST_OPEN = "PullRequestOpen"
    PULL_REQUEST_COMMENT = "PullRequestComment"
    PULL_REQUEST_MERGE = "PullRequestMerge"
    PUSH = "Push"
    CREATE = "Create"
    OTHER = "Other"


# Event types that live inside an issue/PR discussion thread.
THREAD_TYPES = frozenset(
    {
        EventType.ISSUE_OPEN,
        EventType.ISSUE_COMMENT,
        EventType.PULL_REQUEST_OPEN,
        EventType.PULL_REQUEST_COMMENT,
        EventType.PULL_REQUEST_MERGE,
    }
)

# Event types whose payload text counts as a comment for text-similarity.
COMMENT_TYPES = frozenset({EventType.ISSUE_COMMENT, EventType.PULL_REQUEST_COMMENT})


class AccountTag(str, Enum):
    USER = "User"
    BOT = "Bot"
    ORGANIZATION = "Organization"


def parse_timestamp(value: str) -> int:
    """Parse an ISO-8601 UTC instant to epoch seconds, truncating sub-seconds."""
    if not isinstance(value, str) or not value:
        raise DataFormatError(f"not a timestamp: {value!r}")
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise DataFormatError(f"not a timestamp: {value!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def iso_utc(ts: int) -> str:
    """Format epoch seconds as the archive's ``YYYY-MM-DDTHH:MM:SSZ`` form."""
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def day_index(ts: int) -> int:
    """UTC calendar day number (days since 1970-01-01)."""
    return ts // 86400


@dataclass(frozen=True)
class TimeWindow:
    """Half-open UTC interval [start, end), epoch seconds."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.end <= self.start:
            raise DataFormatError(f"empty window: [{self.start}, {self.end})")

    @classmethod
    def from_iso(cls, start: str, end: str) -> "TimeWindow":
        return cls(parse_timestamp(start), parse_timestamp(end))

    def contains(self, ts: int) -> bool:
        return self.start <= ts < self.end

    @property
    def n_days(self) -> int:
        """Number of UTC calendar dates the window touches."""
        return day_index(self.end - 1) - day_index(self.start) + 1


@dataclass(frozen=True)
class Event:
    actor_login: str
    repo_id: str
    event_type: EventType
    occurred_at: int  # epoch seconds, UTC
    thread_key: str | None = None
    comment_text: str | None = None
    commit_count: int = 0
    seq: int = 0  # input order, tie-breaker for equal timestamps

    def __post_init__(self) -> None:
        in_thread = self.event_type in THREAD_TYPES
        if in_thread != (self.thread_key is not None):
            raise DataFormatError(
                f"thread_key must be present iff thread-scoped ({self.event_type.value})"
            )
        if self.commit_count < 0 or (self.commit_count > 0 and self.event_type is not EventType.PUSH):
            raise DataFormatError("commit_count > 0 only allowed on Push events")


@dataclass(frozen=True)
class AccountProfile:
    login: str
    name: str | None = None
    bio: str | None = None
    email: str | None = None
    tag: AccountTag = AccountTag.USER
    followers: int = 0
    following: int = 0

    def __post_init__(self) -> None:
        if not self.login:
            raise DataFormatError("profile login must be non-empty")
        if self.followers < 0 or self.following < 0:
            raise DataFormatError("follower/following counts must be >= 0")


@dataclass
class AccountTimeline:
    login: str
    events: list[Event]
    window: TimeWindow

    def __post_init__(self) -> None:
        for ev in self.events:
            if ev.actor_login != self.login:
                raise DataFormatError(f"foreign event in timeline of {self.login}")
            if not self.window.contains(ev.occurred_at):
                raise DataFormatError(f"event outside window in timeline of {self.login}")


@dataclass
class ParseResult:
    events: list[Event]
    skipped: int


# --- GH-Archive line mapping -------------------------------------------------

def _thread_number(payload: dict, *keys: str) -> int | None:
    for key in keys:
        obj = payload.get(key)
        if isinstance(obj, dict) and isinstance(obj.get("number"), int):
            return obj["number"]
    if isinstance(payload.get("number"), int):
        return payload["number"]
    return None


def _map_line(obj: dict, seq: int) -> Event:
    actor = obj.get("actor")
    login = actor.get("login") if isinstance(actor, dict) else None
    repo = obj.get("repo")
    repo_id = repo.get("id") if isinstance(repo, dict) else None
    raw_type = obj.get("type")
    if not login or repo_id is None or not isinstance(raw_type, str):
        raise DataFormatError("missing actor.login, repo.id, or type")
    occurred_at = parse_timestamp(obj.get("created_at"))
    repo_id = str(repo_id)
    payload = obj.get("payload") or {}
    if not isinstance(payload, dict):
        payload = {}

    event_type = EventType.OTHER
    number = None
    comment_text = None
    commits = 0
    action = payload.get("action")

    if raw_type == "IssuesEvent" and action == "opened":
        event_type = EventType.ISSUE_OPEN
        number = _thread_number(payload, "issue")
    elif raw_type == "IssueCommentEvent":
        event_type = EventType.ISSUE_COMMENT
        number = _thread_number(payload, "issue")
        comment = payload.get("comment")
        if isinstance(comment, dict) and isinstance(comment.get("body"), str):
            comment_text = comment["body"]
    elif raw_type == "PullRequestEvent":
        pr = payload.get("pull_request")
        merged = isinstance(pr, dict) and pr.get("merged") is True
        if action == "opened":
            event_type = EventType.PULL_REQUEST_OPEN
            number = _thread_number(payload, "pull_request")
        elif action == "closed" and merged:
            event_type = EventType.PULL_REQUEST_MERGE
            number = _thread_number(payload, "pull_request")
    elif raw_type == "PullRequestReviewCommentEvent":
        event_type = EventType.PULL_REQUEST_COMMENT
        number = _thread_number(payload, "pull_request")
        comment = payload.get("comment")
        if isinstance(comment, dict) and isinstance(comment.get("body"), str):
            comment_text = comment["body"]
    elif raw_type == "PushEvent":
        event_type = EventType.PUSH
        size = payload.get("size")
        commits = size if isinstance(size, int) and size >= 0 else 0
    elif raw_type == "CreateEvent":
        event_type = EventType.CREATE

    if event_type in THREAD_TYPES:
        if number is None:
            raise DataFormatError(f"thread-scoped {raw_type} without issue/PR number")
        thread_key = f"{repo_id}#{number}"
    else:
        thread_key = None

    return Event(
        actor_login=login,
        repo_id=repo_id,
        event_type=event_type,
        occurred_at=occurred_at,
        thread_key=thread_key,
        comment_text=comment_text,
        commit_count=commits,
        seq=seq,
    )


def parse_archive(stream: Iterable[str], window: TimeWindow) -> ParseResult:
    """Parse line-delimited archive text, keeping events inside ``window``.

    Malformed lines are counted and skipped; blank lines are ignored.
    Raises CorruptArchiveError when more than half of the non-blank lines
    are malformed, which almost always means the file is not an event
    archive at all.
    """
    events: list[Event] = []
    skipped = 0
    total = 0
    seq = 0
    for line in stream:
        line = line.strip()
        if not line:
            continue
        total += 1
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise DataFormatError("line is not a JSON object")
            event = _map_line(obj, seq)
        except (json.JSONDecodeError, DataFormatError):
            skipped += 1
            continue
        seq += 1
        if window.contains(event.occurred_at):
            events.append(event)
    if total > 0 and skipped * 2 > total:
        raise CorruptArchiveError(
            f"{skipped}/{total} lines malformed; not an event archive?"
        )
    return ParseResult(events=events, skipped=skipped)


def open_archive(path: str | Path) -> TextIO:
    """Open a plain or gzip-compressed archive for line-wise reading."""
    path = Path(path)
    raw = open(path, "rb")
    magic = raw.read(2)
    raw.seek(0)
    if magic == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.GzipFile(fileobj=raw), encoding="utf-8")
    return io.TextIOWrapper(raw, encoding="utf-8")


# --- profiles ----------------------------------------------------------------

PROFILE_COLUMNS = ["login", "name", "bio", "email", "tag", "followers", "following"]


def _opt(text: str) -> str | None:
    return text if text else None


def read_profiles(stream: Iterable[str]) -> dict[str, AccountProfile]:
    """Read the profiles CSV (`login,name,bio,email,tag,followers,following`)."""
    reader = csv.DictReader(stream)
    if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != PROFILE_COLUMNS:
        raise DataFormatError(
            f"profiles CSV must have header {','.join(PROFILE_COLUMNS)}"
        )
    profiles: dict[str, AccountProfile] = {}
    for row in reader:
        login = (row["login"] or "").strip()
        if not login:
            raise DataFormatError("profiles CSV row with empty login")
        if login in profiles:
            raise DataFormatError(f"duplicate profile login {login!r}")
        try:
            tag = AccountTag(row["tag"]) if row["tag"] else AccountTag.USER
        except ValueError as exc:
            raise DataFormatError(f"unknown account tag {row['tag']!r}") from exc
        try:
            followers = int(row["followers"] or 0)
            following = int(row["following"] or 0)
        except ValueError as exc:
            raise DataFormatError(f"bad follower counts for {login!r}") from exc
        profiles[login] = AccountProfile(
            login=login,
            name=_opt(row["name"]),
            bio=_opt(row["bio"]),
            email=_opt(row["email"]),
            tag=tag,
            followers=followers,
            following=following,
        )
    return profiles


def load_profiles(path: str | Path) -> dict[str, AccountProfile]:
    with open(path, encoding="utf-8", newline="") as fh:
        return read_profiles(fh)


def write_profiles(profiles: Iterable[AccountProfile], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PROFILE_COLUMNS)
        for p in sorted(profiles, key=lambda p: p.login):
            writer.writerow(
                [p.login, p.name or "", p.bio or "", p.email or "", p.tag.value, p.followers, p.following]
            )


# --- indexing ----------------------------------------------------------------

def index_by_actor(
    events: Iterable[Event],
    profiles: dict[str, AccountProfile],
    window: TimeWindow,
) -> tuple[dict[str, AccountTimeline], dict[str, AccountProfile]]:
    """Group events into per-account timelines, sorted by (time, input order).

    Returns the timelines plus a profile map where every actor is present:
    actors missing from ``profiles`` get a default profile with empty
    optionals and zero counts.
    """
    by_actor: dict[str, list[Event]] = {}
    for ev in events:
        by_actor.setdefault(ev.actor_login, []).append(ev)
    timelines: dict[str, AccountTimeline] = {}
    filled = dict(profiles)
    for login in sorted(by_actor):
        evs = sorted(by_actor[login], key=lambda e: (e.occurred_at, e.seq))
        timelines[login] = AccountTimeline(login=login, events=evs, window=window)
        if login not in filled:
            filled[login] = AccountProfile(login=login)
    return timelines, filled


def filter_active(
    timelines: dict[str, AccountTimeline], min_events: int
) -> dict[str, AccountTimeline]:
    """Keep only accounts with strictly more than ``min_events`` events."""
    if min_events < 0:
        raise DataFormatError("min_events must be >= 0")
    return {login: tl for login, tl in timelines.items() if len(tl.events) > min_events}


class ThreadIndex:
    """All thread-scoped events grouped per thread, sorted within each thread.

    Built once per corpus and read concurrently by the feature extractors.
    """

    def __init__(self, events: Iterable[Event]):
        threads: dict[str, list[Event]] = {}
        for ev in events:
            if ev.thread_key is not None:
                threads.setdefault(ev.thread_key, []).append(ev)
        for key in threads:
            threads[key].sort(key=lambda e: (e.occurred_at, e.seq))
        self._threads = threads
        self._by_login: dict[str, set[str]] = {}
        for key, evs in threads.items():
            for ev in evs:
                self._by_login.setdefault(ev.actor_login, set()).add(key)

    def events_in(self, thread_key: str) -> list[Event]:
        return self._threads.get(thread_key, [])

    def threads_of(self, login: str) -> set[str]:
        return self._by_login.get(login, set())

    def __len__(self) -> int:
        return len(self._threads)


# --- corpus container and on-disk form ---------------------------------------

@dataclass
class Corpus:
    """Everything the feature extractors read, as produced by `ingest`.

    ``events`` keeps every in-window event (thread context must include
    accounts dropped by the activity filter); ``timelines`` holds only the
    retained accounts.
    """

    window: TimeWindow
    events: list[Event]
    profiles: dict[str, AccountProfile]
    timelines: dict[str, AccountTimeline]
    min_events: int = 0
    skipped_lines: int = 0
    _threads: ThreadIndex | None = field(default=None, repr=False, compare=False)

    @property
    def threads(self) -> ThreadIndex:
        if self._threads is None:
            self._threads = ThreadIndex(self.events)
        return self._threads


def build_corpus(
    parsed: ParseResult,
    profiles: dict[str, AccountProfile],
    window: TimeWindow,
    min_events: int = 0,
) -> Corpus:
    events = sorted(parsed.events, key=lambda e: (e.occurred_at, e.seq))
    timelines, filled = index_by_actor(events, profiles, window)
    return Corpus(
        window=window,
        events=events,
        profiles=filled,
        timelines=filter_active(timelines, min_events),
        min_events=min_events,
        skipped_lines=parsed.skipped,
    )


def _event_to_record(ev: Event) -> dict:
    rec = {
        "kind": "event",
        "actor": ev.actor_login,
        "repo": ev.repo_id,
        "type": ev.event_type.value,
        "t": iso_utc(ev.occurred_at),
    }
    if ev.thread_key is not None:
        rec["thread"] = ev.thread_key
    if ev.comment_text is not None:
        rec["text"] = ev.comment_text
    if ev.commit_count:
        rec["commits"] = ev.commit_count
    return rec


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as deterministic JSON lines (gzip when path ends .gz)."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wt", encoding="utf-8") as fh:  # type: ignore[operator]
        meta = {
            "kind": "meta",
            "format": FORMAT_VERSION,
            "window": [iso_utc(corpus.window.start), iso_utc(corpus.window.end)],
            "min_events": corpus.min_events,
            "skipped_lines": corpus.skipped_lines,
        }
        fh.write(json.dumps(meta) + "\n")
        for login in sorted(corpus.profiles):
            p = corpus.profiles[login]
            fh.write(
                json.dumps(
                    {
                        "kind": "profile",
                        "login": p.login,
                        "name": p.name,
                        "bio": p.bio,
                        "email": p.email,
                        "tag": p.tag.value,
                        "followers": p.followers,
                        "following": p.following,
                    }
                )
                + "\n"
            )
        for ev in corpus.events:
            fh.write(json.dumps(_event_to_record(ev)) + "\n")


def load_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    meta = None
    profiles: dict[str, AccountProfile] = {}
    events: list[Event] = []
    seq = 0
    with opener(path, "rt", encoding="utf-8") as fh:  # type: ignore[operator]
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"corrupt corpus file {path}") from exc
            kind = rec.get("kind")
            if kind == "meta":
                meta = rec
            elif kind == "profile":
                profiles[rec["login"]] = AccountProfile(
                    login=rec["login"],
                    name=rec.get("name"),
                    bio=rec.get("bio"),
                    email=rec.get("email"),
                    tag=AccountTag(rec.get("tag", "User")),
                    followers=rec.get("followers", 0),
                    following=rec.get("following", 0),
                )
            elif kind == "event":
                events.append(
                    Event(
                        actor_login=rec["actor"],
                        repo_id=rec["repo"],
                        event_type=EventType(rec["type"]),
                        occurred_at=parse_timestamp(rec["t"]),
                        thread_key=rec.get("thread"),
                        comment_text=rec.get("text"),
                        commit_count=rec.get("commits", 0),
                        seq=seq,
                    )
                )
                seq += 1
            else:
                raise DataFormatError(f"unknown record kind {kind!r} in {path}")
    if meta is None:
        raise DataFormatError(f"{path} has no meta record; not a corpus file")
    if meta.get("format") != FORMAT_VERSION:
        raise DataFormatError(f"unsupported corpus format {meta.get('format')!r}")
    window = TimeWindow.from_iso(meta["window"][0], meta["window"][1])
    parsed = ParseResult(events=events, skipped=int(meta.get("skipped_lines", 0)))
    return build_corpus(parsed, profiles, window, min_events=int(meta.get("min_events", 0)))
