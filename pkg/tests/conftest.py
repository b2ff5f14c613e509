import json
from pathlib import Path

import pytest

from sociosem.corpus import read_corpus

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def mini_corpus():
    return read_corpus(DATA / "mini_posts.jsonl", DATA / "mini_authors.csv")


@pytest.fixture(scope="session")
def mini_manifest() -> dict:
    return json.loads((DATA / "mini_manifest.json").read_text("utf-8"))


_ACCEPTANCE: list[str] = []


class _Criterion:
    def __init__(self, name: str):
        self.name = name
        self.detail = ""


@pytest.fixture
def criterion(request):
    """Open a PASS/FAIL record for one acceptance criterion.

    Call it with the criterion's name before the checks run, and put
    measured values in ``.detail``; the line is printed when the test ends.
    """
    opened = []

    def open_(name: str) -> _Criterion:
        opened.append(_Criterion(name))
        return opened[-1]

    yield open_
    rep = getattr(request.node, "rep_call", None)
    failed = rep is None or rep.failed
    for c in opened:
        line = f"{'FAIL' if failed else 'PASS'}  {c.name}" + (f"  [{c.detail}]" if c.detail else "")
        _ACCEPTANCE.append(line)
        print(line)


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    if rep.when == "call":
        item.rep_call = rep
    return rep


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
