"""Shared fixtures."""
import numpy as np
import pytest

from torusvortex import _backend, green
from torusvortex.green import GreenEvaluator, TorusGeometry

BACKENDS = ["python"] + (["cython"] if _backend.BACKEND == "cython" else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    mod = _backend._kernels_py if request.param == "python" else _backend.kernels
    monkeypatch.setattr(green, "kernels", mod)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def unit():
    return GreenEvaluator()


@pytest.fixture(scope="session")
def wide():
    return GreenEvaluator(TorusGeometry(2.0, 1.0))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, name, ok, detail in sorted(RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {criterion:2d} {'PASS' if ok else 'FAIL'}: {name}: {detail}")
