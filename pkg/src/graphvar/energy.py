"""Variational energies, their gradients, and the admissible lambda-interval
constants for the three systems.

Systems:

* ``finite_poly``:   poly-Laplacian pair with potentials on a finite graph
* ``dirichlet_poly``: poly-Laplacian pair with Dirichlet boundary on a domain
* ``pq_wh``:         first-order (p, q) pair on a truncated locally finite
  graph with potentials bounded below

The energy is I_lambda = Phi - lambda Psi; its critical points solve the
weak-form Euler-Lagrange systems.  All gradients are exact derivatives of the
discrete energy in the free coordinates.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import calculus, models, spaces
from .exceptions import ConstraintError, HypothesisError, ParameterError

SYSTEMS = ("finite_poly", "dirichlet_poly", "pq_wh")


@dataclass
class SystemSpec:
    system: str
    p: float = 2.0
    q: float = 2.0
    m1: int = 1
    m2: int = 1
    lam: float = 1.0
    model: object = None
    arity: int = 2

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ParameterError("unknown system %r" % self.system)
        if self.p <= 1 or self.q <= 1:
            raise ParameterError("exponents must satisfy p, q > 1")
        if self.system == "pq_wh":
            if self.p < 2 or self.q < 2:
                raise ParameterError("pq_wh requires p >= 2 and q >= 2")
            if self.m1 != 1 or self.m2 != 1:
                raise ParameterError("pq_wh is first order (m1 = m2 = 1)")
        if self.m1 < 1 or self.m2 < 1:
            raise ParameterError("orders must be >= 1")
        if self.lam < 0:
            raise ParameterError("lambda must be nonnegative")
        if self.arity not in (1, 2):
            raise ParameterError("arity must be 1 or 2")

    @property
    def delta(self):
        return min(self.p, self.q) if self.arity == 2 else self.p

    @classmethod
    def from_config(cls, config):
        model = None
        if "model" in config and config["model"] is not None:
            mcfg = dict(config["model"])
            mcfg.setdefault("arity", config.get("arity", 2))
            model = models.model_from_config(mcfg)
        return cls(system=config["system"],
                   p=float(config.get("p", 2.0)),
                   q=float(config.get("q", 2.0)),
                   m1=int(config.get("m1", 1)),
                   m2=int(config.get("m2", 1)),
                   lam=float(config.get("lambda", config.get("lam", 1.0))),
                   model=model,
                   arity=int(config.get("arity", 2)))


class EnergyProblem:
    """Binds a SystemSpec to a graph (and domain) and exposes the energy,
    its exact gradient over the free coordinates, and the system norm."""

    def __init__(self, graph, spec, partition=None, smoothing_eps=None):
        self.graph = graph
        self.spec = spec
        self.partition = partition
        if spec.system == "dirichlet_poly":
            if partition is None:
                raise ParameterError("dirichlet_poly needs a DomainPartition")
            self.free_u = partition.free(spec.m1)
            self.free_v = partition.free(spec.m2) if spec.arity == 2 else None
            if self.free_u.size == 0 or (spec.arity == 2 and self.free_v.size == 0):
                raise ConstraintError("degenerate domain: no free vertices")
            self.psi_indices = partition.omega
        else:
            self.free_u = np.arange(graph.n)
            self.free_v = np.arange(graph.n) if spec.arity == 2 else None
            self.psi_indices = None
        if smoothing_eps is None:
            smoothing_eps = 1e-12 if min(spec.p, spec.q) < 2 else 0.0
        self.eps = smoothing_eps
        self.dim = self.free_u.size + (self.free_v.size if spec.arity == 2 else 0)

    # -- state layout ------------------------------------------------------

    def pack(self, u_vals, v_vals=None):
        parts = [np.asarray(u_vals, dtype=float)[self.free_u]]
        if self.spec.arity == 2:
            if v_vals is None:
                raise ParameterError("arity-2 system needs a v component")
            parts.append(np.asarray(v_vals, dtype=float)[self.free_v])
        return np.concatenate(parts)

    def unpack(self, x):
        x = np.asarray(x, dtype=float)
        nu = self.free_u.size
        u = np.zeros(self.graph.n)
        u[self.free_u] = x[:nu]
        if self.spec.arity == 1:
            return u, None
        v = np.zeros(self.graph.n)
        v[self.free_v] = x[nu:]
        return u, v

    def check_state(self, u_vals, v_vals=None):
        """Reject states violating the Dirichlet support constraints."""
        if self.spec.system != "dirichlet_poly":
            return
        for vals, free in ((u_vals, self.free_u), (v_vals, self.free_v)):
            if vals is None:
                continue
            mask = np.ones(self.graph.n, dtype=bool)
            mask[free] = False
            if np.any(np.asarray(vals)[mask] != 0.0):
                raise ConstraintError(
                    "state has nonzero values on collar/boundary vertices")

    # -- functionals -------------------------------------------------------

    def _channel_phi(self, vals, m, l, h):
        g = self.graph
        grad_part = calculus.poly_energy_values(
            g, vals, m, l, support=self.partition if h is None else None,
            eps=self.eps if l < 2 else 0.0)
        if h is None:
            return grad_part / l
        pot = calculus.integrate_values(g, h * np.abs(vals) ** l)
        return (grad_part + pot) / l

    def _channels(self):
        """(m, l, h) per channel; h is None in Dirichlet mode."""
        s = self.spec
        if s.system == "dirichlet_poly":
            hu = hv = None
        else:
            hu, hv = self.graph.h1, self.graph.h2
        ch = [(s.m1, s.p, hu)]
        if s.arity == 2:
            ch.append((s.m2, s.q, hv))
        return ch

    def phi_values(self, u_vals, v_vals=None):
        ch = self._channels()
        total = self._channel_phi(u_vals, *ch[0])
        if self.spec.arity == 2:
            total += self._channel_phi(v_vals, *ch[1])
        return total

    def psi_values(self, u_vals, v_vals=None):
        if self.spec.model is None:
            return 0.0
        g = self.graph
        fvals = self.spec.model.value(g, u_vals,
                                      v_vals if self.spec.arity == 2 else None)
        return calculus.integrate_values(g, fvals, self.psi_indices)

    def total_values(self, u_vals, v_vals=None):
        return self.phi_values(u_vals, v_vals) - self.spec.lam * self.psi_values(u_vals, v_vals)

    # free-vector entry points
    def phi(self, x):
        return self.phi_values(*self.unpack(x))

    def psi(self, x):
        return self.psi_values(*self.unpack(x))

    def total(self, x):
        return self.total_values(*self.unpack(x))

    def gradient(self, x):
        """Exact gradient of the total energy in the free coordinates."""
        u, v = self.unpack(x)
        g = self.graph
        s = self.spec
        ch = self._channels()
        out = []
        for vals, free, (m, l, h), dF in (
                (u, self.free_u, ch[0], "s"),
                ((v, self.free_v, ch[1], "t") if s.arity == 2 else (None,) * 4),):
            if vals is None:
                continue
            grad = calculus.poly_energy_grad_values(
                g, vals, m, l, support=self.partition if h is None else None,
                eps=self.eps if l < 2 else 0.0)
            if h is not None:
                grad = grad + g.mu * h * np.sign(vals) * np.abs(vals) ** (l - 1.0)
            if s.model is not None and s.lam != 0.0:
                t_arg = v if s.arity == 2 else None
                part = (s.model.d_s(g, u, t_arg) if dF == "s"
                        else s.model.d_t(g, u, t_arg))
                fgrad = g.mu * part
                if self.psi_indices is not None:
                    mask = np.zeros(g.n)
                    mask[self.psi_indices] = 1.0
                    fgrad = fgrad * mask
                grad = grad - s.lam * fgrad
            out.append(grad[free])
        return np.concatenate(out)

    # -- norms -------------------------------------------------------------

    def norm_specs(self):
        s = self.spec
        if s.system == "dirichlet_poly":
            kinds = [spaces.NormSpec("dirichlet", m=s.m1, l=s.p,
                                     partition=self.partition)]
            if s.arity == 2:
                kinds.append(spaces.NormSpec("dirichlet", m=s.m2, l=s.q,
                                             partition=self.partition))
            return kinds
        kind = "wh" if s.system == "pq_wh" else "finite_full"
        kinds = [spaces.NormSpec(kind, m=s.m1, l=s.p, channel="h1")]
        if s.arity == 2:
            kinds.append(spaces.NormSpec(kind, m=s.m2, l=s.q, channel="h2"))
        return kinds

    def system_norm(self, x):
        """||(u, v)|| = ||u||_{space1} + ||v||_{space2} on the product space."""
        u, v = self.unpack(x)
        specs = self.norm_specs()
        total = spaces.sobolev_norm_values(self.graph, u, specs[0],
                                           check_support=False)
        if self.spec.arity == 2:
            total += spaces.sobolev_norm_values(self.graph, v, specs[1],
                                                check_support=False)
        return total


def build_problem(graph, spec, partition=None, **kwargs):
    return EnergyProblem(graph, spec, partition, **kwargs)


# -- spec-level functional wrappers ---------------------------------------


def _as_values(problem, state):
    u, v = (state if isinstance(state, tuple) else (state, None))
    uv = u.values if isinstance(u, calculus.GraphFunction) else np.asarray(u, float)
    vv = None
    if v is not None:
        vv = v.values if isinstance(v, calculus.GraphFunction) else np.asarray(v, float)
    problem.check_state(uv, vv)
    return uv, vv


def phi(problem, state):
    """Norm-power part (1/p)||u||^p + (1/q)||v||^q of the system energy."""
    return problem.phi_values(*_as_values(problem, state))


def psi(problem, state):
    """Nonlinearity integral over the system's active vertex set."""
    return problem.psi_values(*_as_values(problem, state))


def total_energy(problem, state):
    return problem.total_values(*_as_values(problem, state))


def energy_gradient(problem, state):
    uv, vv = _as_values(problem, state)
    return problem.gradient(problem.pack(uv, vv))


# -- spike masses and interval constants ----------------------------------


def spike_mass(graph, x, exponent, channel="h1"):
    """M(x) = (deg(x)/2mu(x))^(e/2) mu(x) + h(x) mu(x)
    + sum_{y ~ x} (w_xy / 2mu(y))^(e/2) mu(y)."""
    i = graph.vertex(x)
    h = graph.h1 if channel == "h1" else graph.h2
    e = float(exponent)
    nbr, wts = graph.adj[i]
    center = (graph.deg[i] / (2.0 * graph.mu[i])) ** (e / 2.0) * graph.mu[i]
    pot = h[i] * graph.mu[i]
    ring = math.fsum((wts / (2.0 * graph.mu[nbr])) ** (e / 2.0) * graph.mu[nbr]) \
        if nbr.size else 0.0
    return center + pot + ring


def spike_masses(graph, exponent, channel="h1"):
    return np.asarray([spike_mass(graph, v, exponent, channel)
                       for v in graph.ids])


def minimizing_vertex(graph, p, q, arity=2):
    """The vertex x0 realizing the minimum of both spike masses, ties broken
    by construction order.  Raises HypothesisError when no common minimizer
    exists on the truncation."""
    m1 = spike_masses(graph, p, "h1")
    if arity == 1:
        return int(np.argmin(m1)), m1, None
    m2 = spike_masses(graph, q, "h2")
    tol = 1e-12
    min1 = m1 <= m1.min() * (1 + tol) + tol
    min2 = m2 <= m2.min() * (1 + tol) + tol
    both = np.nonzero(min1 & min2)[0]
    if both.size == 0:
        raise HypothesisError(
            "no vertex minimizes both spike masses on the truncation; "
            "argmin M1 = %s, argmin M2 = %s"
            % (graph.ids[int(np.argmin(m1))], graph.ids[int(np.argmin(m2))]))
    return int(both[0]), m1, m2


@dataclass
class IntervalReport:
    system: str
    arity: int
    rho: float
    K: float
    A: float
    B: float
    a_b_provenance: str
    lambda_lo: float
    lambda_hi: float
    valid: bool
    delta: float
    two_power_factor: float
    details: dict = field(default_factory=dict)

    @property
    def midpoint(self):
        return 0.5 * (self.lambda_lo + self.lambda_hi)

    def to_dict(self):
        return {
            "system": self.system, "arity": self.arity,
            "rho": self.rho, "K": self.K, "A": self.A, "B": self.B,
            "a_b_provenance": self.a_b_provenance,
            "lambda_lo": self.lambda_lo, "lambda_hi": self.lambda_hi,
            "valid": self.valid, "delta": self.delta,
            "two_power_factor": self.two_power_factor,
            "details": self.details,
        }


def _default_radii(delta):
    return list(np.geomspace(10.0, 1e6, 25) ** (1.0 / max(delta / 2.0, 1.0)))


def growth_constants(spec, graph, indices=None, a_b_source="closed_form",
                     radii=None, override=None):
    """Resolve the (A, B) growth pair: user override, documented closed-form
    hint, or sampling estimate (always flagged)."""
    model = spec.model
    if override is not None:
        return float(override[0]), float(override[1]), "user_override"
    if a_b_source == "closed_form" and model is not None:
        hint = model.growth_hint
        if hint is None and isinstance(model, models.PlateauOscillator) \
                and model.p == model.q:
            hint = model.radial_targets(graph, indices=indices)
        if hint is not None:
            return hint.A, hint.B, "documented_target"
    if model is None:
        return 0.0, 0.0, "no_model"
    if radii is None:
        radii = _default_radii(spec.delta)
    a_est, _ = models.estimate_A(model, graph, spec.delta, radii,
                                 indices=indices)
    b_est, _ = models.estimate_B(model, graph, spec.p, spec.q, radii,
                                 indices=indices)
    return a_est, b_est, "estimate"


def interval_constants(graph, spec, partition=None, a_b_source="closed_form",
                       radii=None, ab_override=None, embedding_kwargs=None):
    """Assemble the admissible-interval report for the given system.

    lambda_lo = rho-quantity / B; lambda_hi = 1 / (p 2^(p-1) K A) for the
    arity-2 systems, with no 2^(p-1) factor in the scalar reductions and
    rho = 1 (i.e. lambda_lo = 1/B) in the Dirichlet system.
    """
    s = spec
    details = {}
    psi_idx = None
    if s.system == "dirichlet_poly":
        if partition is None:
            raise ParameterError("dirichlet_poly needs a DomainPartition")
        psi_idx = partition.omega

    if s.system == "finite_poly":
        int_h1 = calculus.integrate_values(graph, graph.h1)
        int_h2 = calculus.integrate_values(graph, graph.h2)
        mu_min = float(graph.mu.min())
        k1 = 1.0 / (mu_min * float(graph.h1.min()))
        k2 = 1.0 / (mu_min * float(graph.h2.min()))
        if s.arity == 2:
            rho = max(int_h1 / s.p, int_h2 / s.q)
            K = max(k1, k2)
        else:
            rho = int_h1 / s.p
            K = k1
        details["embedding_K_l"] = {
            "h1": (1.0 / (mu_min * float(graph.h1.min()))) ** (1.0 / s.p),
            "h2": (1.0 / (mu_min * float(graph.h2.min()))) ** (1.0 / s.q),
        }
        details["integral_h1"] = int_h1
        details["integral_h2"] = int_h2
    elif s.system == "dirichlet_poly":
        mu_min = float(graph.mu[partition.omega].min())
        kwargs = embedding_kwargs or {}
        c1 = spaces.dirichlet_embedding_factor(graph, partition, s.m1, s.p,
                                               **kwargs)
        details["C_factors"] = {"u": c1}
        if s.arity == 2:
            c2 = spaces.dirichlet_embedding_factor(graph, partition, s.m2,
                                                   s.q, **kwargs)
            details["C_factors"]["v"] = c2
            K = max(c1 ** s.p / mu_min, c2 ** s.q / mu_min)
        else:
            K = c1 ** s.p / mu_min
        rho = 1.0
        details["embedding_provenance"] = "numeric"
    else:  # pq_wh
        x0, m1_masses, m2_masses = minimizing_vertex(graph, s.p, s.q, s.arity)
        h_mins = [float(graph.h1.min())]
        if s.arity == 2:
            h_mins.append(float(graph.h2.min()))
        h0 = min(h_mins)
        mu0 = float(graph.mu.min())
        details["x0"] = graph.ids[x0]
        details["h0"] = h0
        details["mu0"] = mu0
        details["M1"] = {graph.ids[i]: float(m1_masses[i])
                         for i in range(graph.n)}
        if s.arity == 2:
            details["M2"] = {graph.ids[i]: float(m2_masses[i])
                             for i in range(graph.n)}
            rho = max(m1_masses[x0] / s.p, m2_masses[x0] / s.q)
            K = max((h0 * mu0) ** (-1.0 / s.p), (h0 * mu0) ** (-1.0 / s.q))
        else:
            rho = m1_masses[x0] / s.p
            K = (h0 * mu0) ** (-1.0 / s.p)
        details["truncation_caveat"] = (
            "locally finite graph handled as a finite truncation; h0, mu0 "
            "are realized minima and x0 is the argmin over the truncation")

    A, B, provenance = growth_constants(s, graph, indices=psi_idx,
                                        a_b_source=a_b_source, radii=radii,
                                        override=ab_override)
    two_power = 2.0 ** (s.p - 1.0) if s.arity == 2 else 1.0
    lambda_hi = math.inf if A <= 0 else 1.0 / (s.p * two_power * K * A)
    if s.system == "dirichlet_poly":
        lambda_lo = math.inf if B <= 0 else 1.0 / B
    else:
        lambda_lo = math.inf if B <= 0 else rho / B
    valid = (0.0 < A < B) and lambda_lo < lambda_hi
    return IntervalReport(system=s.system, arity=s.arity, rho=rho, K=K,
                          A=A, B=B, a_b_provenance=provenance,
                          lambda_lo=lambda_lo, lambda_hi=lambda_hi,
                          valid=valid, delta=s.delta,
                          two_power_factor=two_power, details=details)
