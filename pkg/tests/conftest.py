import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spanprof.cycles import ScriptedCycleSource
from spanprof.recorder import Recorder


# Acceptance-criterion result lines, echoed in the terminal summary so they
# survive output capture.
CRITERION_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def scripted_source():
    return ScriptedCycleSource(step=100)


@pytest.fixture
def recorder(scripted_source, tmp_path):
    return Recorder(scripted_source, str(tmp_path / "traces"))
