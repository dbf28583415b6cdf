"""Pointwise discrete differential operators on weighted graphs.

Everything here is a pure function of immutable inputs.  Array-level helpers
(`*_values`) operate on raw per-vertex vectors; the public operations take
GraphFunction objects and vertex ids.
"""

import math

import numpy as np

from .exceptions import AdjacencyError, BindingError, ParameterError

SQRT2 = math.sqrt(2.0)


class GraphFunction:
    """A real value per vertex of a bound WeightedGraph."""

    def __init__(self, graph, values):
        arr = np.asarray(values, dtype=float)
        if arr.shape != (graph.n,):
            raise BindingError("value vector length %s does not match graph order %d"
                               % (arr.shape, graph.n))
        if not np.all(np.isfinite(arr)):
            raise BindingError("non-finite entries in function values")
        self.graph = graph
        self.values = arr

    @classmethod
    def from_dict(cls, graph, mapping, default=0.0):
        vals = np.full(graph.n, float(default))
        for k, v in mapping.items():
            vals[graph.vertex(k)] = float(v)
        return cls(graph, vals)

    def __call__(self, vid):
        return float(self.values[self.graph.vertex(vid)])


def _same_graph(*funcs):
    g = funcs[0].graph
    for f in funcs[1:]:
        if f.graph is not g:
            raise BindingError("functions bound to different graphs")
    return g


def _edge_weight(g, i, j):
    nbr, wts = g.adj[i]
    hits = np.nonzero(nbr == j)[0]
    if hits.size == 0:
        raise AdjacencyError("vertices %s and %s are not adjacent"
                             % (g.ids[i], g.ids[j]))
    return float(wts[hits[0]])


def directional_derivative(u, x, y):
    """D_{w,y}u(x) = (1/sqrt2) (u(x) - u(y)) sqrt(w_xy / mu(x)); needs xy in E."""
    g = u.graph
    i, j = g.vertex(x), g.vertex(y)
    w = _edge_weight(g, i, j)
    return (u.values[i] - u.values[j]) / SQRT2 * math.sqrt(w / g.mu[i])


def gamma_values(g, u_vals, v_vals):
    """Carre-du-champ Gamma(u, v) as a per-vertex array."""
    du = u_vals[g.edge_b] - u_vals[g.edge_a]
    dv = v_vals[g.edge_b] - v_vals[g.edge_a]
    prod = g.edge_w * du * dv
    out = np.zeros(g.n)
    np.add.at(out, g.edge_a, prod)
    np.add.at(out, g.edge_b, prod)
    return out / (2.0 * g.mu)


def gamma(u, v, x):
    """Gamma(u, v)(x) = (1/2mu(x)) sum_y w_xy (u(y)-u(x)) (v(y)-v(x))."""
    g = _same_graph(u, v)
    i = g.vertex(x)
    nbr, wts = g.adj[i]
    du = u.values[nbr] - u.values[i]
    dv = v.values[nbr] - v.values[i]
    return math.fsum(wts * du * dv) / (2.0 * g.mu[i])


def grad_length_values(g, vals):
    return np.sqrt(np.maximum(gamma_values(g, vals, vals), 0.0))


def grad_length(u, x):
    """|nabla u|(x) = sqrt(Gamma(u, u)(x))."""
    return math.sqrt(max(gamma(u, u, x), 0.0))


def laplacian_values(g, vals):
    d = vals[g.edge_b] - vals[g.edge_a]
    out = np.zeros(g.n)
    np.add.at(out, g.edge_a, g.edge_w * d)
    np.add.at(out, g.edge_b, -g.edge_w * d)
    return out / g.mu


def laplacian(u):
    """(Delta u)(x) = (1/mu(x)) sum_y w_xy (u(y) - u(x)), at every vertex."""
    return GraphFunction(u.graph, laplacian_values(u.graph, u.values))


def iterated_laplacian_values(g, vals, k):
    out = vals
    for _ in range(k):
        out = laplacian_values(g, out)
    return out


def higher_grad_values(g, vals, m):
    """|nabla^m u| as an array: gradient length of Delta^{(m-1)/2}u for odd m,
    |Delta^{m/2}u| for even m."""
    if m < 1:
        raise ParameterError("order m must be >= 1 (use |u| for m = 0)")
    if m % 2 == 1:
        return grad_length_values(g, iterated_laplacian_values(g, vals, (m - 1) // 2))
    return np.abs(iterated_laplacian_values(g, vals, m // 2))


def higher_grad_length(u, m, x):
    """Length of the m-order gradient of u at x."""
    g = u.graph
    return float(higher_grad_values(g, u.values, m)[g.vertex(x)])


def _zero_safe_power(base, expo):
    """base**expo for base >= 0, with 0**expo := 0 when expo < 0 and := 1 when
    expo == 0.  The negative-exponent convention is only ever combined with a
    vanishing difference factor, so the product is well defined."""
    if expo == 0:
        return np.ones_like(base)
    if expo > 0:
        return base ** expo
    out = np.zeros_like(base)
    pos = base > 0
    out[pos] = base[pos] ** expo
    return out


def edge_divergence_values(g, factor, vals):
    """c(x) = (1/2) sum_y (factor(y) + factor(x)) w_xy (vals(x) - vals(y)).

    This is -mu * Delta_l-style operator with a general vertex factor; it is
    also the building block of the weak-form energy gradients.
    """
    d = vals[g.edge_a] - vals[g.edge_b]
    fsum = factor[g.edge_a] + factor[g.edge_b]
    contrib = 0.5 * fsum * g.edge_w * d
    out = np.zeros(g.n)
    np.add.at(out, g.edge_a, contrib)
    np.add.at(out, g.edge_b, -contrib)
    return out


def p_laplacian_values(g, vals, l):
    if l <= 1:
        raise ParameterError("l-Laplacian requires l > 1")
    gl = grad_length_values(g, vals)
    factor = _zero_safe_power(gl, l - 2.0)
    return -edge_divergence_values(g, factor, vals) / g.mu


def p_laplacian(u, l):
    """(Delta_l u)(x) = (1/2mu(x)) sum_y (|nabla u|^{l-2}(y) + |nabla u|^{l-2}(x))
    w_xy (u(y) - u(x))."""
    return GraphFunction(u.graph, p_laplacian_values(u.graph, u.values, l))


def integrate_values(g, vals, indices=None):
    if indices is None:
        prod = g.mu * vals
    else:
        prod = g.mu[indices] * vals[indices]
    # fsum overflows on the huge-but-finite values a diverging line search
    # probes; those sums only need to come back as inf, not be exact
    if np.all(np.isfinite(prod)) and np.all(np.abs(prod) < 1e300):
        return math.fsum(prod)
    return float(np.sum(prod))


def integrate(u, over=None):
    """Integral of u over a vertex set: sum of mu(x) u(x)."""
    g = u.graph
    idx = None if over is None else g.indices(over)
    return integrate_values(g, u.values, idx)


def lr_norm_values(g, vals, r, indices=None):
    if r == math.inf:
        sub = vals if indices is None else vals[indices]
        return float(np.max(np.abs(sub))) if sub.size else 0.0
    if r < 1:
        raise ParameterError("L^r norm requires r >= 1")
    total = integrate_values(g, np.abs(vals) ** r, indices)
    return total ** (1.0 / r)


def lr_norm(u, r, over=None):
    """(sum mu |u|^r)^(1/r); r = inf returns the max of |u| over the set."""
    g = u.graph
    idx = None if over is None else g.indices(over)
    return lr_norm_values(g, u.values, r, idx)


def weak_poly_pairing_values(g, u_vals, phi_vals, m, l, support=None):
    """Weak pairing of the poly-Laplacian of order m, exponent l.

    support: DomainPartition (integrate over Omega and its boundary) or None
    (whole graph).  Odd m pairs gradient factors of the iterated Laplacians;
    even m pairs the iterated Laplacians directly.
    """
    if m < 1:
        raise ParameterError("order m must be >= 1")
    if l <= 1:
        raise ParameterError("exponent l must be > 1")
    idx = None if support is None else support.support
    hg = higher_grad_values(g, u_vals, m)
    factor = _zero_safe_power(hg, l - 2.0)
    if m % 2 == 1:
        k = (m - 1) // 2
        gam = gamma_values(g,
                           iterated_laplacian_values(g, u_vals, k),
                           iterated_laplacian_values(g, phi_vals, k))
        return integrate_values(g, factor * gam, idx)
    k = m // 2
    lu = iterated_laplacian_values(g, u_vals, k)
    lphi = iterated_laplacian_values(g, phi_vals, k)
    return integrate_values(g, factor * lu * lphi, idx)


def weak_poly_pairing(u, phi, m, l, support=None):
    g = _same_graph(u, phi)
    return weak_poly_pairing_values(g, u.values, phi.values, m, l, support)


def poly_energy_values(g, vals, m, l, support=None, eps=0.0):
    """int_S |grad^m u|^l dmu, optionally with the smoothed gradient factor
    (Gamma + eps^2)^(l/2) used for 1 < l < 2 line searches (odd m only)."""
    idx = None if support is None else support.support
    if eps > 0.0 and m % 2 == 1:
        w = iterated_laplacian_values(g, vals, (m - 1) // 2)
        gam = gamma_values(g, w, w)
        return integrate_values(g, (gam + eps * eps) ** (l / 2.0), idx)
    hg = higher_grad_values(g, vals, m)
    return integrate_values(g, hg ** l, idx)


def poly_energy_grad_values(g, vals, m, l, support=None, eps=0.0):
    """Exact gradient of (1/l) int_S |grad^m u|^l dmu with respect to the full
    value vector.  Uses mu-self-adjointness of Delta on the finite vertex set;
    for even m the pairing factor is |Delta^k u|^{l-2} Delta^k u, for odd m the
    edge-divergence of the (possibly smoothed) gradient-length factor."""
    if m < 1:
        raise ParameterError("order m must be >= 1")
    if l <= 1:
        raise ParameterError("exponent l must be > 1")
    if support is None:
        mask = None
    else:
        mask = np.zeros(g.n)
        mask[support.support] = 1.0
    if m % 2 == 0:
        k = m // 2
        lu = iterated_laplacian_values(g, vals, k)
        a = np.sign(lu) * np.abs(lu) ** (l - 1.0)
        if mask is not None:
            a = a * mask
        return g.mu * iterated_laplacian_values(g, a, k)
    k = (m - 1) // 2
    w = iterated_laplacian_values(g, vals, k)
    gam = gamma_values(g, w, w)
    if eps > 0.0:
        factor = (gam + eps * eps) ** ((l - 2.0) / 2.0)
    else:
        factor = _zero_safe_power(np.sqrt(np.maximum(gam, 0.0)), l - 2.0)
    if mask is not None:
        factor = factor * mask
    c = edge_divergence_values(g, factor, w)
    if k == 0:
        return c
    return g.mu * iterated_laplacian_values(g, c / g.mu, k)
