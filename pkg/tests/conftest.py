import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_simplex(rng, A, interior=True):
    x = rng.dirichlet(np.ones(A))
    if interior:
        x = 0.98 * x + 0.02 / A
    return x


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion; returns the boolean for asserting."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip()
        _VERDICTS.append(line)
        print(line)
        return bool(ok)

    return record


@pytest.fixture
def skip_verdict():
    def record(label: str, reason: str):
        _VERDICTS.append(f"SKIP  {label}  {reason}")
        pytest.skip(reason)

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
