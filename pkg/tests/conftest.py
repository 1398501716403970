from __future__ import annotations

from pathlib import Path

import pytest

from hpcause.dsl import parse_model, parse_query

SAMPLES = Path(__file__).resolve().parents[1] / "src" / "hpcause" / "samples"

# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def rock():
    return parse_model((SAMPLES / "rock_throwing.model").read_text())


@pytest.fixture
def rock_query(rock):
    def make(cause: str, strategy: str = "sat", phi: str = "BS=1"):
        return parse_query(f"context: ST_exo=1, BT_exo=1\ncause: {cause}\nphi: {phi}\nstrategy: {strategy}", rock)
    return make
