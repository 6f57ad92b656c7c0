"""Shared pytest plumbing: the acceptance-criteria summary block.

Acceptance tests record one verdict each; the terminal summary prints them as
one line per criterion so a plain ``pytest -v`` run always shows the gate.
"""

_CRITERIA: list[tuple[int, bool, str]] = []


def record_criterion(num: int, ok: bool, detail: str) -> None:
    _CRITERIA.append((num, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(_CRITERIA):
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {verdict} - {detail}")
