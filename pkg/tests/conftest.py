import os
from pathlib import Path

import pytest

from hypdla import suites

CACHE = Path(os.environ.get("HYPDLA_CACHE", Path(__file__).parent / ".cache"))

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ensemble():
    """``ensemble(kind, runs, n)`` -> cached run records (kind is "main" or "pilot")."""
    memo = {}

    def get(kind, runs, n):
        key = (kind, runs, n)
        if key not in memo:
            seeds = suites.main_seeds(runs) if kind == "main" else suites.pilot_seeds(runs)
            memo[key] = suites.run_ensemble(seeds, n, cache_dir=CACHE)
        return memo[key]

    return get
