"""Synthetic accounts and event streams with known ground truth.

Five behavior archetypes: diffuse humans plus four bot kinds — automatic
commenters (reply within seconds of a thread opening, templated text),
CI/CD bots (act only after pull-request events), workflow bots (merge and
triage across many threads), and scanning bots (one report at the same
weekday and hour every week). The outputs are valid inputs to the archive
parser: an events .jsonl, a profiles CSV, and a ground-truth labels CSV.

Distribution parameters are explicit and shipped as defaults; they are
chosen so the extracted features separate the classes by construction,
not to mimic any real population.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .events import AccountProfile, AccountTag, TimeWindow, iso_utc, write_profiles
from .features import DEFAULT_LEXICON_TERMS


class Archetype(str, Enum):
    HUMAN = "Human"
    AUTOMATIC_COMMENTING = "AutomaticCommenting"
    CICD = "CICD"
    WORKFLOW = "Workflow"
    SCANNING = "Scanning"


class Schedule(str, Enum):
    DIFFUSE = "Diffuse"
    TRIGGERED = "Triggered"
    FIXED_WEEKLY = "FixedWeekly"


@dataclass
class BehaviorProfile:
    archetype: Archetype
    schedule: Schedule
    response_delay_mu: float  # ln seconds, log-normal
    response_delay_sigma: float
    comment_templates: list[str] = field(default_factory=list)
    template_variability: float = 0.0  # chance a template slot gets a fresh token
    activity_rate_mu: float = 0.0  # ln events/day, log-normal (diffuse only)
    activity_rate_sigma: float = 0.0
    follower_range: tuple[int, int] = (0, 0)
    following_range: tuple[int, int] = (0, 0)
    name_pattern_rate: float = 0.0  # chance a lexicon term appears in the login
    tag_bot_rate: float = 0.0
    respond_rate: float = 0.9  # triggered archetypes: chance to answer a trigger

    def __post_init__(self) -> None:
        if self.archetype is Archetype.SCANNING and self.schedule is not Schedule.FIXED_WEEKLY:
            raise DataFormatError("scanning bots must use a FixedWeekly schedule")
        if (
            self.archetype in (Archetype.AUTOMATIC_COMMENTING, Archetype.CICD)
            and self.schedule is not Schedule.TRIGGERED
        ):
            raise DataFormatError(f"{self.archetype.value} bots must use a Triggered schedule")


HUMAN_TEMPLATES = ["Thank you!", "LGTM", "+1"]

DEFAULT_PROFILES: dict[Archetype, BehaviorProfile] = {
    Archetype.HUMAN: BehaviorProfile(
        archetype=Archetype.HUMAN,
        schedule=Schedule.DIFFUSE,
        response_delay_mu=np.log(4 * 3600.0),  # replies arrive hours later
        response_delay_sigma=1.0,
        comment_templates=HUMAN_TEMPLATES,
        template_variability=0.0,
        activity_rate_mu=np.log(0.55),
        activity_rate_sigma=0.5,
        follower_range=(1, 80),
        following_range=(1, 60),
        name_pattern_rate=0.05,
        tag_bot_rate=0.0,
    ),
    Archetype.AUTOMATIC_COMMENTING: BehaviorProfile(
        archetype=Archetype.AUTOMATIC_COMMENTING,
        schedule=Schedule.TRIGGERED,
        response_delay_mu=np.log(8.0),  # seconds after the thread opens
        response_delay_sigma=0.5,
        comment_templates=[
            "Thanks for opening this! A maintainer will take a look shortly.",
            "Welcome! Please make sure the template is filled in.",
            "Triage complete, run {n} queued for review.",
        ],
        template_variability=0.3,
        follower_range=(0, 1),
        following_range=(0, 1),
        name_pattern_rate=0.9,
        tag_bot_rate=0.7,
        respond_rate=0.9,
    ),
    Archetype.CICD: BehaviorProfile(
        archetype=Archetype.CICD,
        schedule=Schedule.TRIGGERED,
        response_delay_mu=np.log(90.0),  # pipeline takes a minute or two
        response_delay_sigma=0.6,
        comment_templates=[
            "Pipeline {n} passed on all targets.",
            "Pipeline {n} failed: see the run summary.",
            "Coverage report for build {n} is ready.",
        ],
        template_variability=0.8,
        follower_range=(0, 1),
        following_range=(0, 1),
        name_pattern_rate=0.9,
        tag_bot_rate=0.7,
        respond_rate=0.85,
    ),
    # Workflow bots look the most human: merges land at human-scale delays,
    # names rarely carry lexicon terms, follower counts overlap humans. The
    # Bot tag is their main giveaway, which keeps that feature load-bearing.
    Archetype.WORKFLOW: BehaviorProfile(
        archetype=Archetype.WORKFLOW,
        schedule=Schedule.TRIGGERED,
        response_delay_mu=np.log(2 * 3600.0),
        response_delay_sigma=1.2,
        comment_templates=[],
        follower_range=(0, 25),
        following_range=(0, 15),
        name_pattern_rate=0.35,
        tag_bot_rate=0.9,
        respond_rate=0.12,
    ),
    Archetype.SCANNING: BehaviorProfile(
        archetype=Archetype.SCANNING,
        schedule=Schedule.FIXED_WEEKLY,
        response_delay_mu=0.0,
        response_delay_sigma=0.0,
        comment_templates=[],
        follower_range=(0, 1),
        following_range=(0, 1),
        name_pattern_rate=0.9,
        tag_bot_rate=0.7,
    ),
}

BOT_ARCHETYPES = [
    Archetype.AUTOMATIC_COMMENTING,
    Archetype.CICD,
    Archetype.WORKFLOW,
    Archetype.SCANNING,
]


@dataclass
class GeneratorConfig:
    n_humans: int = 1000
    n_bots_per_archetype: int = 20
    window: TimeWindow = field(
        default_factory=lambda: TimeWindow.from_iso("2024-01-01T00:00:00Z", "2024-03-31T00:00:00Z")
    )
    seed: int = 42
    profiles: dict[Archetype, BehaviorProfile] = field(
        default_factory=lambda: dict(DEFAULT_PROFILES)
    )

    def __post_init__(self) -> None:
        if self.n_humans < 0 or self.n_bots_per_archetype < 0:
            raise DataFormatError("account counts must be >= 0")
        if self.window.end - self.window.start < 60 * 86400:
            raise DataFormatError("generator window must cover at least 60 days")


def load_behavior_spec(path: str | Path) -> dict[Archetype, BehaviorProfile]:
    """Read archetype overrides from a JSON document of profile records."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise DataFormatError("behavior spec must be a JSON object keyed by archetype")
    profiles = dict(DEFAULT_PROFILES)
    for name, overrides in doc.items():
        archetype = Archetype(name)
        base = profiles[archetype]
        fixed = dict(overrides)
        if "schedule" in fixed:
            fixed["schedule"] = Schedule(fixed["schedule"])
        for rng_key in ("follower_range", "following_range"):
            if rng_key in fixed:
                fixed[rng_key] = tuple(fixed[rng_key])
        profiles[archetype] = replace(base, **fixed)
    return profiles


# Name pools vetted to contain no default lexicon term as a substring.
_FIRST = ["maria", "james", "wei", "anya", "tomas", "keiko", "lars", "priya",
          "diego", "emma", "noah", "fatima", "omar", "sven", "elena", "raj"]
_LAST = ["lopez", "smith", "patel", "novak", "tanaka", "silva", "ivanov",
         "schmidt", "rossi", "dubois", "yilmaz", "kowalski", "brown", "davis",
         "wilson", "moreau"]
_BOT_STEMS = {
    Archetype.AUTOMATIC_COMMENTING: ["reply", "greet", "triage"],
    Archetype.CICD: ["build", "deploy", "runner"],
    Archetype.WORKFLOW: ["merge", "labeler", "sweeper"],
    Archetype.SCANNING: ["scan", "watch", "audit"],
}
_WORDS = (
    "the a this that and but with from into over under we you they it is are was were "
    "have has had will should could might make made fix fixed change changed test tests "
    "branch merge main issue error warning stack trace output input value values result "
    "file files line lines patch diff review comment thread user data list map set tree "
    "run runs slow fast small large new old good bad same different missing extra clean "
    "happens happened reproduce steps version release local remote server client parse "
    "render update updated delete removed added add remove hook config setting default "
    "thanks great nice agree disagree sure maybe probably think wonder looks seems feels"
).split()


@dataclass
class _RawEvent:
    t: int
    line: dict

    def dumps(self) -> str:
        out = dict(self.line)
        out["created_at"] = iso_utc(self.t)
        return json.dumps(out, separators=(",", ":"))


@dataclass
class _Thread:
    repo_id: str
    number: int
    opened_at: int
    kind: str  # "issue" | "pr"


@dataclass
class SynthCorpus:
    lines: list[str]
    profiles: list[AccountProfile]
    labels: list[tuple[str, int, str | None]]  # login, value, category


def _repo(repo_id: str, idx: int) -> dict:
    return {"id": int(repo_id), "name": f"acme/project-{idx}"}


class _Generator:
    def __init__(self, config: GeneratorConfig):
        self.config = config
        self.window = config.window
        self.events: list[_RawEvent] = []
        self.threads: list[_Thread] = []
        self.thread_counter: dict[str, int] = {}
        n_accounts = config.n_humans + 4 * config.n_bots_per_archetype
        self.n_repos = max(4, n_accounts // 9)
        self.repo_ids = [str(1000 + i) for i in range(self.n_repos)]
        self.repo_index = {rid: i for i, rid in enumerate(self.repo_ids)}
        self.profiles: list[AccountProfile] = []
        self.labels: list[tuple[str, int, str | None]] = []
        self.used_logins: set[str] = set()
        self._human_logins: set[str] = set()
        self._human_repos: dict[str, list[str]] = {}

    def _rng(self, *keys: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.config.seed, *keys]))

    def _emit(self, t: int, actor: str, repo_id: str, line_type: str, payload: dict) -> None:
        if not self.window.contains(t):
            return
        self.events.append(
            _RawEvent(
                t=t,
                line={
                    "type": line_type,
                    "actor": {"login": actor},
                    "repo": _repo(repo_id, self.repo_index[repo_id]),
                    "payload": payload,
                },
            )
        )

    def _open_thread(self, t: int, actor: str, repo_id: str, kind: str) -> _Thread | None:
        if not self.window.contains(t):
            return None
        number = self.thread_counter.get(repo_id, 0) + 1
        self.thread_counter[repo_id] = number
        thread = _Thread(repo_id=repo_id, number=number, opened_at=t, kind=kind)
        self.threads.append(thread)
        if kind == "issue":
            self._emit(t, actor, repo_id, "IssuesEvent",
                       {"action": "opened", "issue": {"number": number}})
        else:
            self._emit(t, actor, repo_id, "PullRequestEvent",
                       {"action": "opened", "pull_request": {"number": number, "merged": False}})
        return thread

    def _comment(self, t: int, actor: str, thread: _Thread, body: str) -> None:
        if thread.kind == "issue":
            payload = {"action": "created", "issue": {"number": thread.number},
                       "comment": {"body": body}}
            self._emit(t, actor, thread.repo_id, "IssueCommentEvent", payload)
        else:
            payload = {"action": "created", "pull_request": {"number": thread.number},
                       "comment": {"body": body}}
            self._emit(t, actor, thread.repo_id, "PullRequestReviewCommentEvent", payload)

    def _unique_login(self, base: str) -> str:
        login = base
        n = 2
        while login in self.used_logins:
            login = f"{base}-{n}"
            n += 1
        self.used_logins.add(login)
        return login

    def _human_text(self, rng: np.random.Generator) -> str:
        if rng.random() < 0.1:
            return HUMAN_TEMPLATES[int(rng.integers(len(HUMAN_TEMPLATES)))]
        k = int(rng.integers(6, 15))
        return " ".join(_WORDS[int(i)] for i in rng.integers(0, len(_WORDS), size=k))

    def _bot_text(self, rng: np.random.Generator, profile: BehaviorProfile) -> str:
        template = profile.comment_templates[int(rng.integers(len(profile.comment_templates)))]
        if "{n}" in template:
            n = int(rng.integers(1, 100000)) if rng.random() < profile.template_variability else 7
            return template.replace("{n}", str(n))
        return template

    def _make_profile(
        self, login: str, rng: np.random.Generator, profile: BehaviorProfile
    ) -> AccountProfile:
        followers = int(rng.integers(profile.follower_range[0], profile.follower_range[1] + 1))
        following = int(rng.integers(profile.following_range[0], profile.following_range[1] + 1))
        tag = AccountTag.BOT if rng.random() < profile.tag_bot_rate else AccountTag.USER
        if profile.archetype is Archetype.HUMAN:
            name = login.replace("-", " ").title()
            bio = None if rng.random() < 0.6 else "coffee, kernels, and long walks"
            email = None if rng.random() < 0.5 else f"{login}@example.net"
        else:
            name = f"{login.replace('-', ' ').title()} App"
            bio = None
            email = None
        return AccountProfile(
            login=login, name=name, bio=bio, email=email,
            tag=tag, followers=followers, following=following,
        )

    # --- archetype generators -------------------------------------------------

    def humans(self) -> None:
        cfg = self.config
        profile = cfg.profiles[Archetype.HUMAN]
        days = (self.window.end - self.window.start) / 86400.0
        for i in range(cfg.n_humans):
            rng = self._rng(1, i)
            base = f"{_FIRST[int(rng.integers(len(_FIRST)))]}-{_LAST[int(rng.integers(len(_LAST)))]}"
            if rng.random() < profile.name_pattern_rate:
                term = DEFAULT_LEXICON_TERMS[int(rng.integers(len(DEFAULT_LEXICON_TERMS)))]
                base = f"{base}-{term}"
            login = self._unique_login(base)
            self.profiles.append(self._make_profile(login, rng, profile))
            self.labels.append((login, 0, None))
            # people work in a handful of repos, not across the whole platform
            pool_size = min(1 + min(int(rng.poisson(3)), 12), self.n_repos)
            pool = [
                self.repo_ids[int(r)]
                for r in rng.choice(self.n_repos, size=pool_size, replace=False)
            ]
            self._human_repos[login] = pool
            rate = float(rng.lognormal(profile.activity_rate_mu, profile.activity_rate_sigma))
            commits_code = rng.random() >= 0.15  # some people only review and discuss
            n_events = max(12, int(rng.poisson(rate * days)))
            times = np.sort(rng.integers(self.window.start, self.window.end, size=n_events))
            for t in times:
                t = int(t)
                repo_id = pool[int(rng.integers(len(pool)))]
                roll = rng.random()
                if roll < 0.12:
                    self._open_thread(t, login, repo_id, "issue")
                elif roll < 0.22:
                    self._open_thread(t, login, repo_id, "pr")
                elif roll < 0.30:
                    self._emit(t, login, repo_id, "CreateEvent", {"ref_type": "branch"})
                elif roll < 0.62 and commits_code:
                    self._emit(t, login, repo_id, "PushEvent",
                               {"size": int(rng.integers(1, 6))})
                else:
                    self._emit(t, login, repo_id, "WatchEvent", {"action": "started"})

    def human_replies(self) -> None:
        """Second pass: humans comment on threads opened during the first pass.

        Mostly inside their own repos with occasional drive-by comments, and
        with a heavy-tailed reply volume, so lurkers with fewer than two
        comments (hence no similarity value) exist on the human side too.
        """
        cfg = self.config
        profile = cfg.profiles[Archetype.HUMAN]
        if not self.threads:
            return
        by_repo: dict[str, list[_Thread]] = {}
        for thread in self.threads:
            by_repo.setdefault(thread.repo_id, []).append(thread)
        humans = [p.login for p in self.profiles if p.login in self._human_logins]
        for i, login in enumerate(humans):
            rng = self._rng(2, i)
            n_replies = int(rng.lognormal(np.log(6.0), 1.0))
            pool = self._human_repos.get(login, [])
            for _ in range(n_replies):
                candidates = self.threads
                if pool and rng.random() < 0.8:
                    in_pool = by_repo.get(pool[int(rng.integers(len(pool)))], [])
                    if in_pool:
                        candidates = in_pool
                thread = candidates[int(rng.integers(len(candidates)))]
                delay = float(rng.lognormal(profile.response_delay_mu, profile.response_delay_sigma))
                t = thread.opened_at + max(60, int(delay))
                if self.window.contains(t):
                    self._comment(t, login, thread, self._human_text(rng))

    def reactive_bots(self, archetype: Archetype, offset: int) -> None:
        """Automatic-commenting and CI/CD bots answer triggers in their repos."""
        cfg = self.config
        profile = cfg.profiles[archetype]
        triggers = [
            th for th in self.threads
            if th.kind == ("pr" if archetype is Archetype.CICD else "issue")
        ]
        n_bots = cfg.n_bots_per_archetype
        if n_bots == 0:
            return
        assign_rng = self._rng(3, offset)
        repo_owner = {
            rid: int(assign_rng.integers(n_bots)) for rid in self.repo_ids
        }
        for b in range(n_bots):
            rng = self._rng(4, offset, b)
            login = self._register_bot(archetype, b, rng)
            for thread in triggers:
                if repo_owner[thread.repo_id] != b or rng.random() > profile.respond_rate:
                    continue
                delay = max(1, int(rng.lognormal(profile.response_delay_mu,
                                                 profile.response_delay_sigma)))
                self._comment(thread.opened_at + delay, login, thread,
                              self._bot_text(rng, profile))
                if archetype is Archetype.CICD and rng.random() < 0.3:
                    # pipelines push follow-up commits (version bumps, reports)
                    self._emit(thread.opened_at + delay + 5, login, thread.repo_id,
                               "PushEvent", {"size": 1})

    def human_maintainers(self) -> None:
        """A slice of humans merges pull requests in their repos, like workflow bots."""
        profile = self.config.profiles[Archetype.HUMAN]
        prs_by_repo: dict[str, list[_Thread]] = {}
        for thread in self.threads:
            if thread.kind == "pr":
                prs_by_repo.setdefault(thread.repo_id, []).append(thread)
        if not prs_by_repo:
            return
        humans = sorted(self._human_logins)
        for i, login in enumerate(humans):
            rng = self._rng(9, i)
            if rng.random() > 0.25:
                continue
            candidates = [
                th for repo_id in self._human_repos.get(login, [])
                for th in prs_by_repo.get(repo_id, [])
            ]
            if not candidates:
                continue
            for _ in range(int(rng.poisson(6))):
                thread = candidates[int(rng.integers(len(candidates)))]
                delay = max(120, int(rng.lognormal(profile.response_delay_mu,
                                                   profile.response_delay_sigma)))
                self._emit(thread.opened_at + delay, login, thread.repo_id,
                           "PullRequestEvent",
                           {"action": "closed",
                            "pull_request": {"number": thread.number, "merged": True}})

    def workflow_bots(self) -> None:
        cfg = self.config
        profile = cfg.profiles[Archetype.WORKFLOW]
        n_bots = cfg.n_bots_per_archetype
        if n_bots == 0:
            return
        prs = [th for th in self.threads if th.kind == "pr"]
        assign_rng = self._rng(5, 0)
        repo_owner = {rid: int(assign_rng.integers(n_bots)) for rid in self.repo_ids}
        for b in range(n_bots):
            rng = self._rng(6, b)
            login = self._register_bot(Archetype.WORKFLOW, b, rng)
            for thread in prs:
                if repo_owner[thread.repo_id] != b or rng.random() > profile.respond_rate:
                    continue
                delay = max(1, int(rng.lognormal(profile.response_delay_mu,
                                                 profile.response_delay_sigma)))
                t = thread.opened_at + delay
                self._emit(t, login, thread.repo_id, "PullRequestEvent",
                           {"action": "closed",
                            "pull_request": {"number": thread.number, "merged": True}})
                if rng.random() < 0.3:
                    self._emit(t + 1, login, thread.repo_id, "IssuesEvent",
                               {"action": "labeled", "issue": {"number": thread.number}})
                if rng.random() < 0.25:
                    # post-merge housekeeping issue, opened by the bot itself
                    self._open_thread(t + 2, login, thread.repo_id, "issue")

    def scanning_bots(self) -> None:
        cfg = self.config
        profile = cfg.profiles[Archetype.SCANNING]
        for b in range(cfg.n_bots_per_archetype):
            rng = self._rng(8, b)
            login = self._register_bot(Archetype.SCANNING, b, rng)
            repo_id = self.repo_ids[int(rng.integers(self.n_repos))]
            hour = int(rng.integers(0, 24))
            start = self.window.start + hour * 3600  # same weekday/hour each week
            t = start
            while self.window.contains(t):
                self._open_thread(t, login, repo_id, "issue")
                t += 7 * 86400

    def _register_bot(self, archetype: Archetype, b: int, rng: np.random.Generator) -> str:
        profile = self.config.profiles[archetype]
        stems = _BOT_STEMS[archetype]
        base = f"{stems[int(rng.integers(len(stems)))]}"
        if rng.random() < profile.name_pattern_rate:
            term = DEFAULT_LEXICON_TERMS[int(rng.integers(len(DEFAULT_LEXICON_TERMS)))]
            base = f"{base}-{term}"
        login = self._unique_login(f"{base}-{b}")
        self.profiles.append(self._make_profile(login, rng, profile))
        self.labels.append((login, 1, archetype.value))
        return login

    def run(self) -> SynthCorpus:
        self.humans()
        self._human_logins = {p.login for p in self.profiles}
        self.scanning_bots()  # their weekly issues are also reply targets
        self.human_replies()
        self.human_maintainers()
        self.reactive_bots(Archetype.AUTOMATIC_COMMENTING, offset=0)
        self.reactive_bots(Archetype.CICD, offset=1)
        self.workflow_bots()
        self.events.sort(key=lambda ev: ev.t)  # stable: ties keep construction order
        return SynthCorpus(
            lines=[ev.dumps() for ev in self.events],
            profiles=self.profiles,
            labels=self.labels,
        )


def generate_corpus(config: GeneratorConfig) -> SynthCorpus:
    """Build the synthetic corpus in memory; deterministic for a fixed config."""
    return _Generator(config).run()


def write_corpus(corpus: SynthCorpus, out_dir: str | Path) -> dict[str, Path]:
    """Write events.jsonl, profiles.csv, and labels.csv; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    events_path = out / "events.jsonl"
    with open(events_path, "w", encoding="utf-8") as fh:
        for line in corpus.lines:
            fh.write(line + "\n")
    profiles_path = out / "profiles.csv"
    write_profiles(corpus.profiles, profiles_path)
    labels_path = out / "labels.csv"
    with open(labels_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("login,value,category,annotator,decided_at\n")
        for login, value, category in sorted(corpus.labels):
            fh.write(f"{login},{value},{category or ''},synthetic,{iso_utc(0)}\n")
    return {"events": events_path, "profiles": profiles_path, "labels": labels_path}


def linearly_separable(
    n: int, seed: int = 0, gap: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Two Gaussian blobs in 2-D separated by a margin along x0."""
    rng = np.random.default_rng(seed)
    half = n // 2
    neg = rng.normal(loc=(-1.0 - gap, 0.0), scale=0.4, size=(half, 2))
    pos = rng.normal(loc=(1.0 + gap, 0.0), scale=0.4, size=(n - half, 2))
    X = np.vstack([neg, pos])
    y = np.concatenate([np.zeros(half, dtype=np.int64), np.ones(n - half, dtype=np.int64)])
    order = rng.permutation(n)
    return X[order], y[order]
