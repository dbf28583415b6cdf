"""Multi-start descent with deflation for critical points of I_lambda,
plus the explicit unbounded-below probe constructions.

Each start runs Armijo-backtracked gradient descent with Barzilai-Borwein
step scaling ("curvature-informed" steps).  Accepted basins repel later
starts through an additive deflation penalty; every returned point is
re-polished on the unpenalized energy and certified by its true gradient
residual.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import calculus, energy
from .exceptions import ParameterError


@dataclass
class SolverConfig:
    seed: int = 0
    tol: float = 1e-8
    max_iter: int = 10000
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    n_random_starts: int = 9
    amplitudes: tuple = (0.5, 2.0, 8.0)
    probe_amplitudes: tuple = (2.0, 8.0)
    distinct_scale: float = 1e-4
    deflation_strength: float = 1.0
    deflation_radius: float = 1.0
    divergence_floor: float = -1e6

    @classmethod
    def from_config(cls, config):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(config) - known
        if extra:
            raise ParameterError("unknown solver options: %s" % sorted(extra))
        cfg = dict(config)
        for key in ("amplitudes", "probe_amplitudes"):
            if key in cfg:
                cfg[key] = tuple(float(a) for a in cfg[key])
        return cls(**cfg)


@dataclass
class CriticalPoint:
    x: np.ndarray
    phi: float
    psi: float
    energy: float
    residual: float
    norm: float
    start_label: str = ""


@dataclass
class SolveReport:
    points: list
    distinct_pairs: list
    starts_used: int
    iterations: int
    wall_time: float
    interval: object = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self, problem):
        pts = []
        for cp in self.points:
            u, v = problem.unpack(cp.x)
            state = {"u": {problem.graph.ids[i]: float(u[i])
                           for i in range(problem.graph.n)}}
            if v is not None:
                state["v"] = {problem.graph.ids[i]: float(v[i])
                              for i in range(problem.graph.n)}
            pts.append({"state": state, "phi": cp.phi, "psi": cp.psi,
                        "energy": cp.energy, "residual": cp.residual,
                        "norm": cp.norm, "start": cp.start_label})
        return {
            "critical_points": pts,
            "distinct_pairs": self.distinct_pairs,
            "starts_used": self.starts_used,
            "iterations": self.iterations,
            "interval": None if self.interval is None else self.interval.to_dict(),
            "diagnostics": self.diagnostics,
        }


def _deflation_penalty(x, accepted, strength, radius):
    val = np.float64(0.0)
    grad = np.zeros_like(x)
    for cp in accepted:
        d = x - cp.x
        d2 = np.float64(d @ d)
        # cap the scale so diverging iterates overflow to inf, not an error
        scale = strength * min(max(1.0, abs(cp.energy)), 1e8)
        denom = d2 + radius * radius * 1e-4
        val += scale * radius * radius / denom
        with np.errstate(over="ignore", invalid="ignore"):
            grad += -2.0 * scale * radius * radius / denom ** 2 * d
    return float(val), grad


def descend(problem, x0, config, accepted=(), trace=None):
    """Armijo/BB gradient descent on the (possibly deflated) energy.

    Returns (x, iterations).  With an empty accepted set this is plain
    monotone descent on I_lambda; `trace`, when given, collects the accepted
    energies.
    """
    def objective(x):
        val = problem.total(x)
        if accepted:
            pen, _ = _deflation_penalty(x, accepted, config.deflation_strength,
                                        config.deflation_radius)
            val += pen
        return val

    def grad(x):
        gvec = problem.gradient(x)
        if accepted:
            _, pgrad = _deflation_penalty(x, accepted,
                                          config.deflation_strength,
                                          config.deflation_radius)
            gvec = gvec + pgrad
        return gvec

    x = np.asarray(x0, dtype=float).copy()
    # descents on unbounded-below energies legitimately probe huge states;
    # let those evaluations overflow to inf quietly and reject the step
    with np.errstate(over="ignore", invalid="ignore"):
        return _descend_loop(objective, grad, x, config, trace)


def _descend_loop(objective, grad, x, config, trace):
    f = objective(x)
    if not math.isfinite(f):
        return None, 0
    g = grad(x)
    step = 1.0 / (1.0 + np.linalg.norm(g))
    it = 0
    prev_x = prev_g = None
    while it < config.max_iter:
        gn = np.linalg.norm(g)
        if gn <= config.tol:
            break
        if prev_x is not None:
            s = x - prev_x
            y = g - prev_g
            sy = float(s @ y)
            if sy > 1e-300:
                step = float(s @ s) / sy
        step = min(max(step, 1e-14), 1e14)
        t = step
        accepted_step = False
        while t >= 1e-16 * step or t >= 1e-300:
            xn = x - t * g
            fn = objective(xn)
            if math.isfinite(fn) and fn <= f - config.armijo_c * t * gn * gn:
                accepted_step = True
                break
            t *= config.backtrack
            if t < 1e-20:
                break
        if not accepted_step:
            break
        prev_x, prev_g = x, g
        x, f = xn, fn
        if trace is not None:
            trace.append(f)
        g = grad(x)
        it += 1
    return x, it


def _starts(problem, config, rng):
    """Zero state, probe-shaped states at moderate amplitude, and random
    states at the configured amplitude scales."""
    g = problem.graph
    s = problem.spec
    out = [("zero", np.zeros(problem.dim))]
    for amp in config.probe_amplitudes:
        if s.system == "pq_wh":
            x0, _, _ = energy.minimizing_vertex(g, s.p, s.q, s.arity)
            u = np.zeros(g.n)
            u[x0] = amp
            v = u.copy() if s.arity == 2 else None
            out.append(("spike@%g" % amp, problem.pack(u, v)))
        elif s.system == "finite_poly":
            u = np.full(g.n, amp)
            v = u.copy() if s.arity == 2 else None
            out.append(("constant@%g" % amp, problem.pack(u, v)))
        else:
            u = np.zeros(g.n)
            u[problem.free_u] = amp
            if s.arity == 2:
                v = np.zeros(g.n)
                v[problem.free_v] = amp
            else:
                v = None
            out.append(("plateau@%g" % amp, problem.pack(u, v)))
    n_amp = len(config.amplitudes)
    for k in range(config.n_random_starts):
        amp = config.amplitudes[k % n_amp] if n_amp else 1.0
        out.append(("random%d@%g" % (k, amp),
                    amp * rng.standard_normal(problem.dim)))
    return out


def _distinct(problem, cp_a, cp_b, scale):
    dist = problem.system_norm(cp_a.x - cp_b.x)
    radius = scale * (1.0 + 0.5 * (cp_a.norm + cp_b.norm))
    return dist > radius, dist


def solve(graph, spec, partition=None, config=None, interval=None,
          extra_starts=None):
    """Multi-start deflated descent; returns a SolveReport sorted by Phi.

    extra_starts: optional list of (label, free-vector) prepended to the
    standard start set (used for fixed-point re-verification).
    """
    config = config or SolverConfig()
    problem = energy.build_problem(graph, spec, partition)
    rng = np.random.default_rng(config.seed)
    starts = list(extra_starts or []) + _starts(problem, config, rng)

    points = []
    total_iters = 0
    aborted = []
    t0 = time.perf_counter()
    for label, x0 in starts:
        x, it1 = descend(problem, x0, config, accepted=points)
        total_iters += it1
        if x is None:
            aborted.append(label)
            continue
        # polish on the true energy and certify the residual
        x, it2 = descend(problem, x, config)
        total_iters += it2
        g = problem.gradient(x)
        res = float(np.linalg.norm(g))
        if not math.isfinite(res) or res > config.tol:
            continue
        cp = CriticalPoint(
            x=x,
            phi=problem.phi(x),
            psi=problem.psi(x),
            energy=problem.total(x),
            residual=res,
            norm=problem.system_norm(x),
            start_label=label,
        )
        duplicate = False
        for other in points:
            ok, _ = _distinct(problem, cp, other, config.distinct_scale)
            if not ok:
                duplicate = True
                break
        if not duplicate:
            points.append(cp)
    wall = time.perf_counter() - t0

    points.sort(key=lambda cp: cp.phi)
    pairs = []
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            _, dist = _distinct(problem, points[i], points[j],
                                config.distinct_scale)
            pairs.append({"i": i, "j": j, "distance": dist})
    report = SolveReport(points=points, distinct_pairs=pairs,
                         starts_used=len(starts), iterations=total_iters,
                         wall_time=wall, interval=interval,
                         diagnostics={"aborted_starts": aborted})
    return report, problem


# -- explicit unboundedness probes ----------------------------------------


def probe_unbounded_constant(graph, spec, xi_seq, eta_seq=None, floor=-1e6):
    """Evaluate I_lambda along the constant states u = xi, v = eta and check
    the bound I <= rho (xi^p + eta^q) - lambda Psi at each step."""
    if spec.system != "finite_poly":
        raise ParameterError("constant probe applies to the finite system")
    problem = energy.build_problem(graph, spec)
    if spec.arity == 2 and eta_seq is None:
        eta_seq = xi_seq
    int_h1 = calculus.integrate_values(graph, graph.h1)
    int_h2 = calculus.integrate_values(graph, graph.h2)
    rho = (max(int_h1 / spec.p, int_h2 / spec.q) if spec.arity == 2
           else int_h1 / spec.p)
    rows = []
    for k, xi in enumerate(xi_seq):
        eta = eta_seq[k] if spec.arity == 2 else None
        u = np.full(graph.n, float(xi))
        v = np.full(graph.n, float(eta)) if spec.arity == 2 else None
        phi_val = problem.phi_values(u, v)
        psi_val = problem.psi_values(u, v)
        total = phi_val - spec.lam * psi_val
        growth = xi ** spec.p + (eta ** spec.q if spec.arity == 2 else 0.0)
        bound = rho * growth - spec.lam * psi_val
        # constant states have vanishing gradient lengths of every order,
        # so phi must reduce to the potential terms exactly
        pot_only = (abs(xi) ** spec.p * int_h1 / spec.p
                    + (abs(eta) ** spec.q * int_h2 / spec.q
                       if spec.arity == 2 else 0.0))
        rows.append({
            "xi": float(xi), "eta": None if eta is None else float(eta),
            "phi": phi_val, "psi": psi_val, "energy": total,
            "bound": bound, "bound_holds": total <= bound + 1e-9 * abs(bound),
            "phi_potential_only": pot_only,
            "phi_matches_potential": abs(phi_val - pot_only)
            <= 1e-10 * max(1.0, abs(pot_only)),
        })
    energies = [r["energy"] for r in rows]
    return {
        "kind": "constant", "rho": rho, "rows": rows,
        "min_energy": min(energies), "floor": floor,
        "diverged_below_floor": min(energies) < floor,
    }


def probe_unbounded_spike(graph, spec, x0, xi_seq, eta_seq=None, floor=-1e6):
    """Evaluate I_lambda along one-vertex spike states at x0 and cross-check
    the closed-form gradient lengths and Phi = xi^p M1/p + eta^q M2/q."""
    if spec.system != "pq_wh":
        raise ParameterError("spike probe applies to the pq_wh system")
    problem = energy.build_problem(graph, spec)
    i0 = graph.vertex(x0)
    if spec.arity == 2 and eta_seq is None:
        eta_seq = xi_seq
    m1 = energy.spike_mass(graph, x0, spec.p, "h1")
    m2 = energy.spike_mass(graph, x0, spec.q, "h2") if spec.arity == 2 else None
    nbr, wts = graph.adj[i0]
    rows = []
    for k, xi in enumerate(xi_seq):
        eta = eta_seq[k] if spec.arity == 2 else None
        u = np.zeros(graph.n)
        u[i0] = float(xi)
        v = None
        if spec.arity == 2:
            v = np.zeros(graph.n)
            v[i0] = float(eta)
        # closed-form gradient lengths of the spike
        gl = calculus.grad_length_values(graph, u)
        expect_center = math.sqrt(graph.deg[i0] / (2.0 * graph.mu[i0])) * abs(xi)
        err = abs(gl[i0] - expect_center) / max(1.0, expect_center)
        for j, w in zip(nbr, wts):
            expect = math.sqrt(w / (2.0 * graph.mu[j])) * abs(xi)
            err = max(err, abs(gl[j] - expect) / max(1.0, expect))
        phi_val = problem.phi_values(u, v)
        psi_val = problem.psi_values(u, v)
        closed_phi = abs(xi) ** spec.p * m1 / spec.p
        if spec.arity == 2:
            closed_phi += abs(eta) ** spec.q * m2 / spec.q
        rows.append({
            "xi": float(xi), "eta": None if eta is None else float(eta),
            "phi": phi_val, "psi": psi_val,
            "energy": phi_val - spec.lam * psi_val,
            "phi_closed_form": closed_phi,
            "phi_rel_err": abs(phi_val - closed_phi) / max(1.0, abs(closed_phi)),
            "gradient_rel_err": err,
        })
    energies = [r["energy"] for r in rows]
    return {
        "kind": "spike", "x0": str(x0), "M1": m1, "M2": m2, "rows": rows,
        "min_energy": min(energies), "floor": floor,
        "diverged_below_floor": min(energies) < floor,
    }
