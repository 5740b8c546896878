import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from cliprm.encoders import load_encoder  # noqa: E402

CARTPOLE_GOAL = "pole vertically upright on top of the cart"
CARTPOLE_BASELINE = "pole and cart"


@pytest.fixture
def mock_encoder():
    return load_encoder("mock")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_units(rng, n, k):
    v = rng.standard_normal((n, k))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record_acceptance(number, ok, summary):
    """``ok`` is True, False, or None for a criterion that was skipped."""
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    ACCEPTANCE_LINES.append((number, f"[acceptance {number}] {status}: {summary}"))
    print(ACCEPTANCE_LINES[-1][1])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
