import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `oracle` importable

# Registry filled by tests/test_acceptance.py; the terminal summary prints one
# line per criterion so a full run always ends with a readable scoreboard.
ACCEPTANCE_RESULTS = {}


def record_acceptance(criterion, label, ok, expected_failure=False):
    ACCEPTANCE_RESULTS.setdefault(criterion, []).append((label, ok, expected_failure))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE_RESULTS):
        rows = ACCEPTANCE_RESULTS[crit]
        hard_ok = all(ok for _, ok, exp in rows if not exp)
        known_gaps = [label for label, ok, exp in rows if exp and not ok]
        surprises = [label for label, ok, exp in rows if exp and ok]
        if hard_ok and not known_gaps and not surprises:
            status = "PASS"
        elif hard_ok and known_gaps and not surprises:
            status = "FAIL (expected)"
        else:
            status = "FAIL"
        tr.write_line(f"criterion {crit}: {status}")
        for label, ok, exp in rows:
            mark = "ok" if ok else ("known gap" if exp else "FAILED")
            tr.write_line(f"    [{mark}] {label}")


@pytest.fixture(scope="session")
def app():
    from lambdalab.service import create_app

    return create_app()


@pytest.fixture(scope="session")
def client(app):
    from fastapi.testclient import TestClient

    with TestClient(app) as c:
        yield c
