import os

import hypothesis
import numpy as np
import pytest

from ehrelay import DEFAULT_MODEL

np.seterr(all="warn", under="ignore")

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def model():
    return DEFAULT_MODEL


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance(capsys):
    """Record and print one PASS/FAIL line per acceptance criterion."""

    def record(number, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
