"""Shared pytest hooks: echo acceptance criterion results at the end."""

import sys


def pytest_terminal_summary(terminalreporter):
    module = (sys.modules.get("test_acceptance")
              or sys.modules.get("tests.test_acceptance"))
    lines = getattr(module, "RESULTS", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
