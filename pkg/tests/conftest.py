import numpy as np
import pytest

from ccenum.geometry import PotentialParams

_VERDICTS: list[str] = []


def equilateral(side: float) -> np.ndarray:
    """Counter-clockwise equilateral triangle centered at the origin."""
    rad = side / np.sqrt(3.0)
    ang = np.pi / 2 + 2 * np.pi * np.arange(3) / 3
    return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


def two_body(m1: float, m2: float, alpha: float) -> np.ndarray:
    r = (m1 + m2) ** (1.0 / (alpha + 2.0))
    return np.array([[-m2 * r / (m1 + m2), 0.0], [m1 * r / (m1 + m2), 0.0]])


def random_config(rng, n: int, min_sep: float = 0.2) -> np.ndarray:
    while True:
        q = rng.uniform(-1.5, 1.5, size=(n, 2))
        d = np.linalg.norm(q[:, None] - q[None], axis=-1) + np.eye(n) * 10
        if d.min() > min_sep:
            return q


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)


@pytest.fixture
def unit3():
    return PotentialParams(1.0, [1.0, 1.0, 1.0])


def record_verdict(line: str) -> None:
    _VERDICTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
