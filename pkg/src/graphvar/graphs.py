"""Weighted graph storage, measures, potentials, and domain partitions.

A graph is immutable after construction.  Vertex ids are opaque strings and
the construction order fixes the layout of every vector quantity downstream.
"""

import json
from collections import deque

import numpy as np

from .exceptions import (
    DegenerateDomainError,
    GraphFormatError,
    UnknownVertexError,
)

UNREACHABLE = float("inf")


class WeightedGraph:
    """Finite weighted graph with vertex measure mu and potentials h1, h2.

    Edge weights must be positive and symmetric; self-loops are rejected.
    A locally finite graph is represented by a finite truncation of it, with
    all hypotheses checked on the truncation only.
    """

    def __init__(self, vertices, mu, edges, h1=None, h2=None):
        """vertices: iterable of ids; mu: id -> measure or aligned sequence;
        edges: iterable of (a, b, w); h1, h2: like mu (default 1.0).
        """
        ids = [str(v) for v in vertices]
        if not ids:
            raise GraphFormatError("empty vertex list")
        if len(set(ids)) != len(ids):
            raise GraphFormatError("duplicate vertex ids")
        self.ids = tuple(ids)
        self.index = {v: i for i, v in enumerate(ids)}
        self.n = len(ids)

        self.mu = self._vertex_array(mu, "mu", default=None)
        if np.any(self.mu <= 0):
            raise GraphFormatError("mu must be positive on every vertex")
        self.h1 = self._vertex_array(h1, "h1", default=1.0)
        self.h2 = self._vertex_array(h2, "h2", default=1.0)
        if np.any(self.h1 <= 0) or np.any(self.h2 <= 0):
            raise GraphFormatError("potentials h1, h2 must be positive")

        seen = {}
        ea, eb, ew = [], [], []
        for a, b, w in edges:
            a, b = str(a), str(b)
            if a not in self.index or b not in self.index:
                raise GraphFormatError("edge endpoint not a vertex: (%s, %s)" % (a, b))
            if a == b:
                raise GraphFormatError("self-loop at %s" % a)
            w = float(w)
            if w <= 0:
                raise GraphFormatError("nonpositive weight on edge (%s, %s)" % (a, b))
            key = (min(a, b), max(a, b))
            if key in seen:
                if seen[key] != w:
                    raise GraphFormatError("asymmetric duplicate edge (%s, %s)" % (a, b))
                raise GraphFormatError("duplicate edge (%s, %s)" % (a, b))
            seen[key] = w
            ea.append(self.index[a])
            eb.append(self.index[b])
            ew.append(w)
        self.edge_a = np.asarray(ea, dtype=np.intp)
        self.edge_b = np.asarray(eb, dtype=np.intp)
        self.edge_w = np.asarray(ew, dtype=float)

        nbrs = [[] for _ in range(self.n)]
        for i, j, w in zip(self.edge_a, self.edge_b, self.edge_w):
            nbrs[i].append((j, w))
            nbrs[j].append((i, w))
        self.adj = tuple(
            (np.asarray([j for j, _ in lst], dtype=np.intp),
             np.asarray([w for _, w in lst], dtype=float))
            for lst in nbrs
        )
        self.deg = np.zeros(self.n)
        np.add.at(self.deg, self.edge_a, self.edge_w)
        np.add.at(self.deg, self.edge_b, self.edge_w)

    def _vertex_array(self, data, name, default):
        if data is None:
            if default is None:
                raise GraphFormatError("missing %s" % name)
            return np.full(self.n, float(default))
        if isinstance(data, dict):
            missing = [v for v in self.ids if v not in data]
            if missing:
                raise GraphFormatError("missing %s for vertices %s" % (name, missing))
            return np.asarray([float(data[v]) for v in self.ids])
        arr = np.asarray(data, dtype=float)
        if arr.shape != (self.n,):
            raise GraphFormatError("%s has wrong length" % name)
        return arr.copy()

    def vertex(self, vid):
        """Index of a vertex id, raising UnknownVertexError if absent."""
        try:
            return self.index[vid]
        except KeyError:
            raise UnknownVertexError(vid) from None

    def indices(self, vids):
        return np.asarray(sorted(self.vertex(v) for v in set(vids)), dtype=np.intp)

    @property
    def total_measure(self):
        return float(np.sum(self.mu))


def degree(g, x):
    """deg(x) = sum of the weights of the edges incident to x."""
    return float(g.deg[g.vertex(x)])


def graph_distance(g, x, y):
    """Unweighted hop count between x and y; UNREACHABLE when disconnected."""
    i, j = g.vertex(x), g.vertex(y)
    if i == j:
        return 0
    dist = _bfs(g, [i])
    return int(dist[j]) if dist[j] >= 0 else UNREACHABLE


def _bfs(g, sources):
    """Hop distance from a set of source indices; -1 marks unreachable."""
    dist = np.full(g.n, -1, dtype=np.intp)
    queue = deque()
    for s in sources:
        dist[s] = 0
        queue.append(s)
    while queue:
        i = queue.popleft()
        for j in g.adj[i][0]:
            if dist[j] < 0:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


class DomainPartition:
    """A bounded domain Omega with its exterior boundary and Dirichlet collar.

    The boundary lies outside Omega, so the interior always equals Omega;
    the computational stencil support is Omega together with its boundary.
    collar(m) collects interior vertices within hop distance m-1 of the
    boundary; free(m) is the rest, the coordinates a Dirichlet solve may move.
    """

    def __init__(self, graph, omega_indices):
        self.graph = graph
        self.omega = np.asarray(sorted(set(int(i) for i in omega_indices)), dtype=np.intp)
        if self.omega.size == 0:
            raise DegenerateDomainError("empty domain")
        in_omega = np.zeros(graph.n, dtype=bool)
        in_omega[self.omega] = True
        bset = set()
        for i in self.omega:
            for j in graph.adj[i][0]:
                if not in_omega[j]:
                    bset.add(int(j))
        self.boundary = np.asarray(sorted(bset), dtype=np.intp)
        self.interior = self.omega  # boundary is exterior by construction
        self.in_omega = in_omega
        self.support = np.asarray(sorted(set(self.omega) | bset), dtype=np.intp)
        # hop distance from the boundary, for collar computation
        if self.boundary.size:
            self._bdist = _bfs(graph, list(self.boundary))
        else:
            self._bdist = np.full(graph.n, -1, dtype=np.intp)
        self._collar_cache = {}

    def collar(self, m):
        """Interior vertices within hop distance m-1 of the boundary."""
        if m < 1:
            raise DegenerateDomainError("order m must be >= 1")
        if m not in self._collar_cache:
            d = self._bdist[self.interior]
            near = (d >= 0) & (d <= m - 1)
            self._collar_cache[m] = (
                self.interior[near], self.interior[~near])
        return self._collar_cache[m][0]

    def free(self, m):
        """Interior minus collar(m): the free Dirichlet coordinates."""
        self.collar(m)
        return self._collar_cache[m][1]

    def ids(self, indices):
        return tuple(self.graph.ids[i] for i in indices)


def partition_domain(g, omega, m=1):
    """Split a vertex subset into boundary/interior/collar/free sets.

    omega is a set of vertex ids.  The partition is cached per (graph, omega);
    collar/free are available for any order via the returned object.
    """
    part = DomainPartition(g, [g.vertex(v) for v in omega])
    part.collar(m)
    return part


def load_graph(source):
    """Load a graph (and optional domain) from a JSON file path or dict.

    Returns (graph, omega_ids_or_None).
    """
    if isinstance(source, (str, bytes)):
        with open(source) as fh:
            data = json.load(fh)
    else:
        data = source
    if not isinstance(data, dict) or "vertices" not in data:
        raise GraphFormatError("graph file must be an object with 'vertices'")
    verts = data["vertices"]
    if not isinstance(verts, list) or not verts:
        raise GraphFormatError("empty vertex list")
    ids, mu, h1, h2 = [], [], [], []
    for entry in verts:
        if "id" not in entry or "mu" not in entry:
            raise GraphFormatError("vertex entries need 'id' and 'mu'")
        ids.append(str(entry["id"]))
        mu.append(float(entry["mu"]))
        h1.append(float(entry.get("h1", 1.0)))
        h2.append(float(entry.get("h2", 1.0)))
    edges = []
    for entry in data.get("edges", []):
        try:
            edges.append((entry["a"], entry["b"], entry["w"]))
        except (KeyError, TypeError):
            raise GraphFormatError("edge entries need 'a', 'b', 'w'") from None
    g = WeightedGraph(ids, mu, edges, h1=h1, h2=h2)
    omega = None
    if "domain" in data and data["domain"] is not None:
        dom = data["domain"]
        if "omega" not in dom:
            raise GraphFormatError("domain needs an 'omega' vertex list")
        omega = [str(v) for v in dom["omega"]]
        for v in omega:
            g.vertex(v)
    return g, omega
