"""Shared fixtures plus a terminal summary for the acceptance suite."""

from __future__ import annotations

from pathlib import Path

import pytest

DATA_DIR = Path(__file__).resolve().parent / "data"

# nodeid -> (criterion description, outcome); filled by the report hook
_acceptance_results: dict[str, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


def criterion(description: str):
    """Mark a test as one acceptance criterion for the terminal summary."""

    def wrap(fn):
        fn._criterion = description
        return fn

    return wrap


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    desc = getattr(getattr(item, "function", None), "_criterion", None)
    if desc is None:
        return
    if rep.when == "call":
        _acceptance_results[item.nodeid] = (desc, rep.outcome)
    elif rep.when == "setup" and rep.outcome != "passed":
        _acceptance_results[item.nodeid] = (desc, rep.outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for desc, outcome in _acceptance_results.values():
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"  [{status}] {desc}")
