import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sympt.extremal import SearchOptions, run_to_extremal

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def _first_entangled(n, seeds=range(200)):
    for seed in seeds:
        traj = run_to_extremal(rng_seed=seed, n_qubits=n, opts=SearchOptions(stop_when_separable=True))
        if traj.entangled:
            return traj
    raise AssertionError(f"no entangled terminal for N={n}")


@pytest.fixture(scope="session")
def extremal4():
    return _first_entangled(4)


@pytest.fixture(scope="session")
def extremal5():
    return _first_entangled(5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
