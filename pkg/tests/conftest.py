import numpy as np
import pytest

from coagbreak import EfficiencyModel, Exponential, KernelSpec, SolverConfig, build_mesh, run
from coagbreak.moments import SpaceParams


@pytest.fixture(scope="session")
def default_spec():
    return KernelSpec(efficiency=EfficiencyModel.constant(0.5))


@pytest.fixture(scope="session")
def default_mesh():
    return build_mesh(1e-4, 50.0, 256)


@pytest.fixture(scope="session")
def default_params():
    return SpaceParams(0.5, 1.5)


@pytest.fixture(scope="session")
def default_traj(default_spec, default_mesh):
    return run(Exponential(), default_mesh, default_spec, SolverConfig(t_end=1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, passed, detail)``; lines are printed in the terminal summary."""
    log = request.config.stash[_ACCEPTANCE]

    def record(name, passed, detail):
        log.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(log, key=lambda item: int(item[0][2:])):
        terminalreporter.write_line(f"{name} {'PASS' if passed else 'FAIL'}  {detail}")
