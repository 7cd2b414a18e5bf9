import math

import numpy as np
import pytest

from weakcomm._kernels import available_backends
from weakcomm.spin import bloch_state

BACKENDS = available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def kernels(request):
    return BACKENDS[request.param]


def random_unit(rng: np.random.Generator) -> tuple:
    v = rng.normal(size=3)
    return tuple(v / np.linalg.norm(v))


def random_state(rng: np.random.Generator):
    return bloch_state(random_unit(rng))


SQRT2 = math.sqrt(2.0)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line, print it, and fail the test when it is red."""

    def record(number: int, title: str, ok: bool, detail: str):
        line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
