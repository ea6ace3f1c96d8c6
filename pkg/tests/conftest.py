"""Shared pytest hooks: print the acceptance report after the test run."""
from __future__ import annotations

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    report = getattr(mod, "REPORT", None) if mod else None
    if report:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in report:
            terminalreporter.write_line(line)
