"""Sobolev-type norms on graphs and embedding constants.

Three norm kinds:

* ``finite_full``: (int_V (|grad^m u|^l + h|u|^l) dmu)^(1/l) on a finite graph
* ``dirichlet``:   (int_{Omega u bdry} |grad^m u|^l dmu)^(1/l), u zero outside
  the free set of its domain partition
* ``wh``:          the m = 1 potential norm on a (truncated) locally finite
  graph with h bounded below

Closed-form embedding constants follow the finite-graph sup-norm bound and
the locally-finite sup/L^r bounds; the Dirichlet constant has no closed form
and is computed numerically as the exact finite-dimensional operator norm.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import calculus
from .exceptions import (
    ConstraintError,
    DegenerateDomainError,
    ParameterError,
)


@dataclass(frozen=True)
class NormSpec:
    kind: str                    # finite_full | dirichlet | wh
    m: int = 1
    l: float = 2.0
    channel: str = "h1"
    partition: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("finite_full", "dirichlet", "wh"):
            raise ParameterError("unknown norm kind %r" % self.kind)
        if self.l <= 1:
            raise ParameterError("norm exponent must satisfy l > 1")
        if self.m < 1:
            raise ParameterError("norm order must satisfy m >= 1")
        if self.channel not in ("h1", "h2"):
            raise ParameterError("channel must be 'h1' or 'h2'")
        if self.kind == "dirichlet":
            if self.partition is None:
                raise ParameterError("dirichlet norm needs a DomainPartition")
            if self.partition.free(self.m).size == 0:
                raise DegenerateDomainError(
                    "no free vertices at order m = %d" % self.m)
        if self.kind == "wh" and self.m != 1:
            raise ParameterError("wh norm is first order only")

    def potential(self, g):
        return g.h1 if self.channel == "h1" else g.h2


def sobolev_norm_values(g, vals, spec, check_support=True):
    """Norm of a raw value vector under a NormSpec."""
    if spec.kind == "dirichlet":
        part = spec.partition
        if check_support:
            free = np.zeros(g.n, dtype=bool)
            free[part.free(spec.m)] = True
            if np.any(vals[~free] != 0.0):
                raise ConstraintError(
                    "dirichlet function must vanish outside free(%d)" % spec.m)
        hg = calculus.higher_grad_values(g, vals, spec.m)
        total = calculus.integrate_values(g, hg ** spec.l, part.support)
        return total ** (1.0 / spec.l)
    h = spec.potential(g)
    hg = calculus.higher_grad_values(g, vals, spec.m)
    total = calculus.integrate_values(
        g, hg ** spec.l + h * np.abs(vals) ** spec.l)
    return total ** (1.0 / spec.l)


def sobolev_norm(u, spec):
    return sobolev_norm_values(u.graph, u.values, spec)


def _target_norm_values(g, vals, target, indices=None):
    """target: 'sup' or ('lr', r)."""
    if target == "sup":
        return calculus.lr_norm_values(g, vals, math.inf, indices)
    kind, r = target
    if kind != "lr":
        raise ParameterError("target must be 'sup' or ('lr', r)")
    return calculus.lr_norm_values(g, vals, r, indices)


def closed_form_constant(g, spec, target="sup"):
    """Closed-form embedding constants, or None where no closed form
    exists (dirichlet kind)."""
    l = spec.l
    if spec.kind == "finite_full":
        if target != "sup":
            return None
        h = spec.potential(g)
        return (1.0 / (g.mu.min() * h.min())) ** (1.0 / l)
    if spec.kind == "wh":
        h0 = float(spec.potential(g).min())
        mu0 = float(g.mu.min())
        if target == "sup":
            return 1.0 / (h0 ** (1.0 / l) * mu0 ** (1.0 / l))
        kind, r = target
        if r < l:
            raise ParameterError("L^r embedding needs l <= r < inf")
        return mu0 ** ((l - r) / (l * r)) * h0 ** (-1.0 / l)
    return None


def _active_indices(g, spec):
    if spec.kind == "dirichlet":
        return spec.partition.free(spec.m)
    return np.arange(g.n)


def _target_indices(g, spec):
    # sup / L^r norms are taken over Omega in dirichlet mode, V otherwise
    if spec.kind == "dirichlet":
        return spec.partition.omega
    return None


def numeric_constant(g, spec, target="sup", restarts=20, iters=300, seed=0):
    """Best constant sup_{u != 0} ||u||_target / ||u||_spec, by projected
    (sub)gradient ascent on the unit sphere with random restarts.

    Only feasible functions are evaluated, so the result never exceeds the
    true operator norm (and hence never exceeds a valid closed-form bound).
    """
    active = _active_indices(g, spec)
    tidx = _target_indices(g, spec)
    dim = active.size
    rng = np.random.default_rng(seed)

    def expand(x):
        vals = np.zeros(g.n)
        vals[active] = x
        return vals

    def ratio(x):
        vals = expand(x)
        denom = sobolev_norm_values(g, vals, spec, check_support=False)
        if denom == 0:
            return 0.0
        return _target_norm_values(g, vals, target, tidx) / denom

    part = spec.partition if spec.kind == "dirichlet" else None

    def ratio_grad(x):
        """Value and an ascent (sub)gradient of the ratio on active coords."""
        vals = expand(x)
        nval = sobolev_norm_values(g, vals, spec, check_support=False)
        tval = _target_norm_values(g, vals, target, tidx)
        if nval == 0 or tval == 0:
            return 0.0, np.zeros(dim)
        ngrad = calculus.poly_energy_grad_values(
            g, vals, spec.m, spec.l, support=part)
        if spec.kind != "dirichlet":
            h = spec.potential(g)
            ngrad = ngrad + g.mu * h * np.sign(vals) * np.abs(vals) ** (spec.l - 1.0)
        ngrad = nval ** (1.0 - spec.l) * ngrad
        if target == "sup":
            sub = np.abs(vals) if tidx is None else np.abs(vals[tidx])
            arg = int(np.argmax(sub))
            full = arg if tidx is None else int(tidx[arg])
            tgrad = np.zeros(g.n)
            tgrad[full] = np.sign(vals[full])
        else:
            _, r = target
            tgrad = np.zeros(g.n)
            core = g.mu * np.sign(vals) * np.abs(vals) ** (r - 1.0)
            if tidx is None:
                tgrad = tval ** (1.0 - r) * core
            else:
                tgrad[tidx] = tval ** (1.0 - r) * core[tidx]
        grad = (tgrad / tval - ngrad / nval)[active]
        return tval / nval, grad

    best = 0.0
    starts = [np.ones(dim)]
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = 1.0
        starts.append(e)
    for _ in range(restarts):
        starts.append(rng.standard_normal(dim))
    for x0 in starts:
        x = x0 / np.linalg.norm(x0)
        val = ratio(x)
        step = 0.5
        for _ in range(iters):
            val, grad = ratio_grad(x)
            gn = np.linalg.norm(grad)
            if gn < 1e-12:
                break
            improved = False
            while step > 1e-12:
                xn = x + step * grad / gn
                xn /= np.linalg.norm(xn)
                vn = ratio(xn)
                if vn > val + 1e-15:
                    x, val = xn, vn
                    improved = True
                    step *= 1.5
                    break
                step *= 0.5
            if not improved:
                break
        best = max(best, val)
    return best


def embedding_constant(g, spec, target="sup", **kwargs):
    """Returns (constant, flag) with flag 'closed_form' or 'numeric'.

    The closed form is preferred where one exists; the Dirichlet
    constant is always numeric.
    """
    cf = closed_form_constant(g, spec, target)
    if cf is not None:
        return cf, "closed_form"
    return numeric_constant(g, spec, target, **kwargs), "numeric"


def dirichlet_embedding_factor(g, partition, m, l, **kwargs):
    """The constant C(m, l, Omega) of the sup-norm Dirichlet embedding
    ||u||_inf <= C / mu_min^(1/l) ||u||, recovered from the numeric operator
    norm."""
    spec = NormSpec("dirichlet", m=m, l=l, partition=partition)
    c_star = numeric_constant(g, spec, "sup", **kwargs)
    mu_min = float(g.mu[partition.omega].min())
    return c_star * mu_min ** (1.0 / l)
