import numpy as np
import pytest

from spinor_hardy import fields, quadrature


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def example_gauge():
    return fields.make_gauge(fields.example_field(1.0, 0.0))


@pytest.fixture(scope="session")
def example_gauges():
    return {
        (lam, alpha): fields.make_gauge(fields.example_field(lam, alpha))
        for lam, alpha in [(1.0, 0.0), (2.0, 1.0), (3.0, -2.5)]
    }


@pytest.fixture(scope="session")
def small_grid():
    """Resolves Gaussian trial fields of width ~1 well below 1e-8."""
    return quadrature.grid3d(32, 12, 24, r_max=10.0)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def report(request, capsys):
    """Print one PASS/FAIL line for an acceptance criterion and keep it for the summary."""

    def emit(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash.setdefault(ACCEPTANCE_LINES, []).append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
