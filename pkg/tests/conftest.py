"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import OrderedDict

import pytest

_CRITERIA = OrderedDict()


class CriterionLog:
    """Record sub-check outcomes for a numbered criterion."""

    def record(self, number: int, title: str, ok: bool, detail: str):
        entry = _CRITERIA.setdefault(number, {"title": title, "parts": []})
        entry["parts"].append((ok, detail))
        return ok


@pytest.fixture(scope="session")
def criteria():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        ok = all(p[0] for p in entry["parts"])
        detail = "; ".join(("" if p[0] else "FAILED ") + p[1] for p in entry["parts"])
        terminalreporter.write_line(
            f"criterion {number} [{'PASS' if ok else 'FAIL'}] {entry['title']}: {detail}")
