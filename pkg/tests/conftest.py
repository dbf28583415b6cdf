import os

import numpy as np
import pytest

from graphvar import graphs

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def data_path(name):
    return os.path.join(DATA, name)


def random_connected_graph(rng, n_min=3, n_max=30):
    """Random connected graph: spanning tree plus extra edges, with
    w in (0, 2], mu in [0.5, 2], h in [0.5, 2]."""
    n = int(rng.integers(n_min, n_max + 1))
    ids = ["v%d" % i for i in range(n)]
    edges = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.add((j, i))
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            edges.add((min(i, j), max(i, j)))
    edge_list = [(ids[a], ids[b], float(rng.uniform(1e-6, 2.0)))
                 for a, b in sorted(edges)]
    mu = rng.uniform(0.5, 2.0, size=n)
    h1 = rng.uniform(0.5, 2.0, size=n)
    h2 = rng.uniform(0.5, 2.0, size=n)
    return graphs.WeightedGraph(ids, mu, edge_list, h1=h1, h2=h2)


@pytest.fixture
def two_vertex():
    g, _ = graphs.load_graph(data_path("two_vertex.json"))
    return g


@pytest.fixture
def petersen():
    g, _ = graphs.load_graph(data_path("ten_vertex.json"))
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
