import sys

import numpy as np
import pytest

from qudit_reservoir.linalg import RandomSource


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def source():
    return RandomSource(2024)


def naive_matmul(a, b):
    rows, inner = len(a), len(a[0])
    cols = len(b[0])
    out = [[0j] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            acc = 0j
            for k in range(inner):
                acc += complex(a[i][k]) * complex(b[k][j])
            out[i][j] = acc
    return np.array(out)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "VERDICTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
