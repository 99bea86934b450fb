import warnings

import pytest

from pairlind.config import REFERENCE_HZ
from pairlind.model import ModelParams

_CRITERIA = []


@pytest.fixture
def ref_point():
    """Reference device at delta_omega/2pi = 50 MHz, n_bar = 2, Omega_R unset."""
    return ModelParams.from_hz(**REFERENCE_HZ, n_bar=2.0, delta_omega=50e6)


@pytest.fixture
def record_criterion():
    def record(name, ok, detail=""):
        _CRITERIA.append((name, bool(ok), detail))
        return ok

    return record


@pytest.fixture(autouse=True)
def _quiet_reduced_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="good-cavity condition violated")
        yield


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
