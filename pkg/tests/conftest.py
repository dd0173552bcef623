import shutil
from pathlib import Path

import pytest

from deckforge.fixtures import generate_corpus, multi_shape_deck

DATA = Path(__file__).resolve().parent / "data"
CASES = DATA / "cases"

# criterion number -> (title, passed); filled in by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool]] = {}


@pytest.fixture(scope="session")
def corpus():
    return generate_corpus(10)


@pytest.fixture
def deck():
    """Three-slide deck with placeholders, a table, a chart, a picture and a group."""
    return multi_shape_deck().build()


@pytest.fixture
def cases_copy(tmp_path):
    """Writable copy of the frozen fixture cases."""
    dst = tmp_path / "cases"
    shutil.copytree(CASES, dst)
    return dst


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {n}: {title}")
