import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from multlab import eigendecompose, laplacian

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def acceptance_log():
    """Criterion id -> list of (passed, detail); printed at the end of the run."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for ac in sorted(_ACCEPTANCE, key=lambda s: int(s[2:])):
        parts = _ACCEPTANCE[ac]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"{ac:<5} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def lap1d():
    return laplacian(1, np.pi, 401)


@pytest.fixture(scope="session")
def es1d(lap1d):
    return eigendecompose(lap1d)


@pytest.fixture(scope="session")
def lap1d_small():
    return laplacian(1, np.pi, 101)


@pytest.fixture(scope="session")
def es1d_small(lap1d_small):
    return eigendecompose(lap1d_small)


@pytest.fixture(scope="session")
def es1d_neumann_small():
    return eigendecompose(laplacian(1, np.pi, 101, bc="neumann"))
