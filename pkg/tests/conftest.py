from __future__ import annotations

from pathlib import Path

import pytest

from bothound.events import TimeWindow, build_corpus, parse_archive

FIXTURES = Path(__file__).parent / "fixtures"
HAND_CORPUS = FIXTURES / "hand_corpus"

_acceptance_results: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def hand_corpus():
    """The 12-event worked-answer corpus, parsed and indexed."""
    from bothound.events import load_profiles

    window = TimeWindow.from_iso("2024-03-01T00:00:00Z", "2024-03-15T00:00:00Z")
    with open(HAND_CORPUS / "events.jsonl", encoding="utf-8") as fh:
        parsed = parse_archive(fh, window)
    profiles = load_profiles(HAND_CORPUS / "profiles.csv")
    return build_corpus(parsed, profiles, window)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "test_acceptance" in item.nodeid:
        _acceptance_results.append((item.name, report.outcome))
    elif (
        report.when == "setup"
        and report.skipped
        and "test_acceptance" in item.nodeid
    ):
        _acceptance_results.append((item.name, "skipped"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results:
        flag = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome)
        terminalreporter.write_line(f"[{flag}] {name}")
