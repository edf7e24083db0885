import numpy as np
import pytest

from xdgshock.euler import GasModel, post_shock_state, pre_shock_state, to_conserved


@pytest.fixture
def gas():
    return GasModel()


@pytest.fixture
def shock_states(gas):
    """Conserved pre/post states of the M=1.5 stationary shock."""
    pre = pre_shock_state(1.5, gas)
    post = post_shock_state(pre, 1.5, gas)
    return to_conserved(pre, gas).as_array(), to_conserved(post, gas).as_array()


def random_primitive(rng, n):
    rho = rng.uniform(0.1, 5.0, n)
    u = rng.uniform(-3.0, 3.0, n)
    p = rng.uniform(0.1, 5.0, n)
    return np.array([rho, u, p])


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    """The default M=1.5 run with its CSV artifacts, shared because it takes seconds."""
    from xdgshock.config import RunConfig
    from xdgshock.experiment import run_experiment

    out = tmp_path_factory.mktemp("default-run")
    return run_experiment(RunConfig(out=str(out))), out


@pytest.fixture(scope="session")
def default_result(default_run):
    return default_run[0]
