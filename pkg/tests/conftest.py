import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture(scope="session")
def acceptance_log(request):
    log = getattr(request.config, "_acceptance_log", None)
    if log is None:
        log = []
        request.config._acceptance_log = log
    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = getattr(config, "_acceptance_log", None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(log, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
