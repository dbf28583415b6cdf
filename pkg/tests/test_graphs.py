import math

import numpy as np
import pytest

from graphvar import graphs
from graphvar.exceptions import GraphFormatError, UnknownVertexError

from conftest import data_path, random_connected_graph


def test_loader_roundtrip(two_vertex):
    assert two_vertex.n == 2
    assert two_vertex.ids == ("a", "b")
    assert two_vertex.mu.tolist() == [1.0, 1.0]
    assert graphs.degree(two_vertex, "a") == 1.0


def test_loader_rejects_negative_weight():
    with pytest.raises(GraphFormatError):
        graphs.load_graph({
            "vertices": [{"id": "a", "mu": 1.0}, {"id": "b", "mu": 1.0}],
            "edges": [{"a": "a", "b": "b", "w": -1.0}],
        })


def test_loader_rejects_empty_vertices():
    with pytest.raises(GraphFormatError):
        graphs.load_graph({"vertices": []})


def test_loader_rejects_nonpositive_measure():
    with pytest.raises(GraphFormatError):
        graphs.load_graph({
            "vertices": [{"id": "a", "mu": 0.0}],
        })


def test_self_loop_rejected():
    with pytest.raises(GraphFormatError):
        graphs.WeightedGraph(["a"], [1.0], [("a", "a", 1.0)])


def test_duplicate_edge_rejected():
    with pytest.raises(GraphFormatError):
        graphs.WeightedGraph(["a", "b"], [1.0, 1.0],
                             [("a", "b", 1.0), ("b", "a", 2.0)])


def test_unknown_vertex():
    g, _ = graphs.load_graph(data_path("two_vertex.json"))
    with pytest.raises(UnknownVertexError):
        g.vertex("nope")


def test_graph_distance(petersen):
    # Petersen graph has diameter 2
    dmax = max(graphs.graph_distance(petersen, a, b)
               for a in petersen.ids for b in petersen.ids)
    assert dmax == 2
    assert graphs.graph_distance(petersen, "o0", "o0") == 0


def test_distance_unreachable():
    g = graphs.WeightedGraph(["a", "b", "c"], [1.0] * 3, [("a", "b", 1.0)])
    assert math.isinf(graphs.graph_distance(g, "a", "c"))


def test_partition_sets(petersen):
    omega = ["o0", "o1", "o2", "o3", "o4"]
    part = graphs.partition_domain(petersen, omega)
    # exterior boundary of the outer cycle is the whole inner pentagram
    assert set(part.ids(part.boundary)) == {"i0", "i1", "i2", "i3", "i4"}
    assert set(part.ids(part.interior)) == set(omega)
    # free(1) = interior; free(2) drops vertices adjacent to the boundary,
    # which here is every outer vertex
    assert set(part.ids(part.free(1))) == set(omega)
    assert part.free(2).size == 0


def test_partition_collar_growth(rng):
    for _ in range(10):
        g = random_connected_graph(rng, 6, 20)
        omega = list(g.ids[: g.n // 2])
        part = graphs.partition_domain(g, omega)
        prev = -1
        for m in (1, 2, 3):
            free = part.free(m)
            # free sets shrink with the order and stay inside omega
            assert set(free) <= set(part.interior.tolist())
            if prev >= 0:
                assert free.size <= prev
            prev = free.size
