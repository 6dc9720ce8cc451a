"""Shared fixtures and the acceptance summary printed at the end of a run."""
from __future__ import annotations

import pytest

from rvbggm import LatticeSpec, build_rvb

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


_STATES: dict = {}


@pytest.fixture(scope="session")
def rvb_state():
    """Cached RVB states keyed by ``(m, mp, bc)``."""

    def get(m: int, mp: int, bc: str = "open"):
        key = (m, mp, bc)
        if key not in _STATES:
            _STATES[key] = build_rvb(LatticeSpec(m, mp, bc))
        return _STATES[key]

    return get
