import numpy as np
import pytest

from cgpakit.dataset import NumericDataset
from cgpakit.graphs import Dag


def linear_sem_dataset(edges, n, seed, noise="uniform", names=None):
    """Small linear-SEM sampler used as a fixture across discovery tests.

    ``edges`` maps (from, to) -> weight over nodes named by their sorted
    appearance; noise is unit-variance uniform or gaussian.
    """
    rng = np.random.default_rng(seed)
    if names is None:
        names = sorted({u for e in edges for u in e})
    index = {u: i for i, u in enumerate(names)}
    dag = Dag(tuple(names), frozenset(edges))
    order = dag.topological_order()
    X = np.zeros((n, len(names)))
    for node in order:
        if noise == "uniform":
            e = rng.uniform(-np.sqrt(3), np.sqrt(3), n)
        else:
            e = rng.normal(0.0, 1.0, n)
        for parent in dag.parents(node):
            e = e + edges[(parent, node)] * X[:, index[parent]]
        X[:, index[node]] = e
    return NumericDataset.from_matrix(X, names), dag


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
