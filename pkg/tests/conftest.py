"""Shared pytest hooks.

The acceptance tests record a verdict per numbered criterion; the terminal
summary prints them as one line each so a full run ends with a readable
scorecard regardless of how the individual assertions fared.
"""
from __future__ import annotations

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="-")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"CRITERION {number}: {verdict}  {detail}")
