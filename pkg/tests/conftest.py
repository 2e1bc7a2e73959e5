from __future__ import annotations

from test_acceptance import TITLES, criterion_of

_outcomes: dict[int, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    k = criterion_of(report.nodeid.rsplit("::", 1)[-1])
    if k is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes[k] = ("PASS" if report.passed else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(TITLES):
        if k in _outcomes:
            status, dur = _outcomes[k]
            terminalreporter.write_line(f"criterion {k:2d} {status}  {TITLES[k]}  [{dur:.1f}s]")
        else:
            terminalreporter.write_line(f"criterion {k:2d} NOT RUN  {TITLES[k]}")
