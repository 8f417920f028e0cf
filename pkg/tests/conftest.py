from pathlib import Path

import pytest

from gradedflow.parser import parse_program

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"

# criterion -> (passed, description); filled by test_acceptance
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def load(name: str):
    path = CORPUS / name
    return parse_program(path.read_text(), str(path))


@pytest.fixture
def corpus():
    return load


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, text = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {text}")
