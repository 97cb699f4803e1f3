import os

import pytest

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")

# Filled in by tests/test_acceptance.py; printed after the run so every
# acceptance criterion shows exactly one PASS/FAIL line in the output.
_ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, ok: bool, detail: str = "") -> None:
    _ACCEPTANCE_RESULTS.append((name, ok, detail))


@pytest.fixture(scope="session")
def golden_corpus_path():
    path = os.path.join(DATA_DIR, "golden_corpus.txt")
    assert os.path.exists(path), "run scripts/make_golden_corpus.py first"
    return path


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE_RESULTS:
        verdict = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"ACCEPTANCE {name}: {verdict}{suffix}")
