import math

import numpy as np
import pytest

from ringmes import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


def random_state(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


@pytest.fixture
def strong_u():
    """L=3, N=2 ring with C = U/10 = V/10."""
    return ModelParams(L=3, N=2, C=1.0, U=10.0, V=10.0)


PI = math.pi


ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {title} -- {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
