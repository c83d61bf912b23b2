"""Echo the acceptance verdict lines in the terminal summary.

The acceptance tests record one ``[PASS]``/``[FAIL]`` line per criterion in
``test_acceptance.VERDICT_LINES``; pytest's capture would otherwise hide
them on success.
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICT_LINES", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
