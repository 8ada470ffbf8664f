"""Shared pytest plumbing: a per-criterion verdict list printed at the end."""

from __future__ import annotations

_VERDICTS: list[tuple[int, bool, str]] = []


def record(criterion: int, passed: bool, detail: str) -> None:
    """Log one acceptance-criterion verdict for the terminal summary."""
    _VERDICTS.append((criterion, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(_VERDICTS):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {criterion}: {verdict} - {detail}")
