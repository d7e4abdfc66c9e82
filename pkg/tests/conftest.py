import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def small_ba():
    from sifirank import derive_balance_sheets, generate_ba
    net = generate_ba(30, 3, 2, rng_seed=11)
    return net, derive_balance_sheets(net, rng_seed=11)


def cycle(n, weight=1.0):
    from sifirank import DirectedFinancialNetwork
    return DirectedFinancialNetwork.from_edges(n, [(i, (i + 1) % n, weight) for i in range(n)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = []


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line for a criterion, then assert it."""
    def _report(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
        ACCEPTANCE.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
