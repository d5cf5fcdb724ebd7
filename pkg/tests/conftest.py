import numpy as np
import pytest

from netmatch import GraphonSpec, default_grid


@pytest.fixture(scope="session")
def homophily():
    return GraphonSpec.homophily()


@pytest.fixture(scope="session")
def additive_logistic():
    return GraphonSpec.additive_logistic()


@pytest.fixture(scope="session")
def two_block():
    return GraphonSpec.blockmodel([[0.8, 0.2], [0.2, 0.6]])


@pytest.fixture(scope="session")
def grid_graphon():
    rng = np.random.default_rng(314)
    raw = rng.uniform(0.05, 0.95, size=(8, 8))
    return GraphonSpec.grid(0.5 * (raw + raw.T))


@pytest.fixture(scope="session")
def smooth_grid(homophily):
    return default_grid(homophily)


def builtin_specs():
    """One instance per built-in graphon kind, plus a thinned variant."""
    rng = np.random.default_rng(314)
    raw = rng.uniform(0.05, 0.95, size=(8, 8))
    return {
        "homophily": GraphonSpec.homophily(),
        "additive_logistic": GraphonSpec.additive_logistic(),
        "blockmodel": GraphonSpec.blockmodel([[0.8, 0.2], [0.2, 0.6]]),
        "grid": GraphonSpec.grid(0.5 * (raw + raw.T)),
        "sparse_homophily": GraphonSpec.homophily(sparsity_scale=0.3),
    }
