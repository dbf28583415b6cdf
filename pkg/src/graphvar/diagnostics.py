"""Numerical verification of the stated identities and inequalities, and
estimation of the sublevel ratio function phi(r) and its liminf gamma.

Failures are report entries, never exceptions: every check returns the worst
observed error next to its tolerance.
"""

import math

import numpy as np

from . import calculus, energy, spaces
from .exceptions import ParameterError


def _rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-8)


def check_identities(graph, trials=100, l_set=(2.0, 2.5, 3.0, 4.0),
                     m_set=(1, 2), seed=0):
    """Random-function verification of the carre-du-champ decomposition, the
    summation-by-parts identity, the l = 2 reduction of the l-Laplacian, the
    mu-symmetry of the Laplacian, and gradient-length homogeneity."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    g = graph
    checks = {
        "gamma_decomposition": {"tol": 1e-12, "max_rel_err": 0.0},
        "summation_by_parts": {"tol": 1e-10, "max_rel_err": 0.0,
                               "l_set": list(l_set)},
        "l2_reduces_to_laplacian": {"tol": 1e-14, "max_rel_err": 0.0},
        "mu_symmetry": {"tol": 1e-12, "max_rel_err": 0.0},
        "grad_length_homogeneity": {"tol": 1e-12, "max_rel_err": 0.0},
        "poly_pairing_m1": {"tol": 1e-10, "max_rel_err": 0.0},
    }

    # l = 2 reduction as a matrix identity on the vertex basis
    for i in range(g.n):
        e = np.zeros(g.n)
        e[i] = 1.0
        a = calculus.p_laplacian_values(g, e, 2.0)
        b = calculus.laplacian_values(g, e)
        for x in range(g.n):
            err = _rel_err(a[x], b[x])
            checks["l2_reduces_to_laplacian"]["max_rel_err"] = max(
                checks["l2_reduces_to_laplacian"]["max_rel_err"], err)

    for _ in range(trials):
        u = rng.standard_normal(g.n)
        v = rng.standard_normal(g.n)

        # Gamma(u, v)(x) = sum_y D_{w,y}u(x) D_{w,y}v(x)
        gam = calculus.gamma_values(g, u, v)
        for i in range(g.n):
            nbr, wts = g.adj[i]
            terms = ((u[i] - u[nbr]) / calculus.SQRT2 * np.sqrt(wts / g.mu[i])
                     * (v[i] - v[nbr]) / calculus.SQRT2 * np.sqrt(wts / g.mu[i]))
            rhs = math.fsum(terms) if nbr.size else 0.0
            err = _rel_err(gam[i], rhs)
            checks["gamma_decomposition"]["max_rel_err"] = max(
                checks["gamma_decomposition"]["max_rel_err"], err)

        # summation by parts: int (Delta_l u) v = -int |grad u|^{l-2} Gamma(u, v)
        for l in l_set:
            lhs = calculus.integrate_values(
                g, calculus.p_laplacian_values(g, u, l) * v)
            gl = calculus.grad_length_values(g, u)
            factor = calculus._zero_safe_power(gl, l - 2.0)
            rhs = -calculus.integrate_values(
                g, factor * calculus.gamma_values(g, u, v))
            err = _rel_err(lhs, rhs)
            checks["summation_by_parts"]["max_rel_err"] = max(
                checks["summation_by_parts"]["max_rel_err"], err)

        # weak pairing at m = 1 equals minus the distributional form
        for l in l_set:
            lhs = calculus.weak_poly_pairing_values(g, u, v, 1, l)
            rhs = -calculus.integrate_values(
                g, calculus.p_laplacian_values(g, u, l) * v)
            err = _rel_err(lhs, rhs)
            checks["poly_pairing_m1"]["max_rel_err"] = max(
                checks["poly_pairing_m1"]["max_rel_err"], err)

        # mu-weighted symmetry of Delta
        lhs = calculus.integrate_values(g, calculus.laplacian_values(g, u) * v)
        rhs = calculus.integrate_values(g, calculus.laplacian_values(g, v) * u)
        checks["mu_symmetry"]["max_rel_err"] = max(
            checks["mu_symmetry"]["max_rel_err"], _rel_err(lhs, rhs))

        # |grad(cu)| = |c| |grad u|
        c = float(rng.uniform(-3.0, 3.0))
        a = calculus.grad_length_values(g, c * u)
        b = abs(c) * calculus.grad_length_values(g, u)
        for x in range(g.n):
            checks["grad_length_homogeneity"]["max_rel_err"] = max(
                checks["grad_length_homogeneity"]["max_rel_err"],
                _rel_err(a[x], b[x]))

    for entry in checks.values():
        entry["passed"] = bool(entry["max_rel_err"] <= entry["tol"])
    checks["all_passed"] = all(
        entry["passed"] for key, entry in checks.items()
        if isinstance(entry, dict))
    return checks


def _batch_norms(g, batch, m, l, h):
    """Sobolev norms of a batch of functions (rows), vectorized."""
    vals = batch
    for _ in range(m // 2):
        vals = _batch_lap(g, vals)
    if m % 2 == 1:
        hg = np.sqrt(np.maximum(_batch_gamma(g, vals), 0.0))
    else:
        hg = np.abs(vals)
    total = (hg ** l + h[None, :] * np.abs(batch) ** l) @ g.mu
    return total ** (1.0 / l)


def _batch_lap(g, batch):
    d = batch[:, g.edge_b] - batch[:, g.edge_a]
    out = np.zeros_like(batch)
    np.add.at(out.T, g.edge_a, (g.edge_w * d).T)
    np.add.at(out.T, g.edge_b, (-g.edge_w * d).T)
    return out / g.mu[None, :]


def _batch_gamma(g, batch):
    d = batch[:, g.edge_b] - batch[:, g.edge_a]
    prod = g.edge_w * d * d
    out = np.zeros_like(batch)
    np.add.at(out.T, g.edge_a, prod.T)
    np.add.at(out.T, g.edge_b, prod.T)
    return out / (2.0 * g.mu[None, :])


def check_embeddings(graph, samples=10000, l_set=(2.0, 2.5, 3.0, 4.0),
                     m_set=(1, 2), r_set=(3.0, 4.0), seed=0, batch=500):
    """Zero-violation check of the closed-form sup-norm and L^r embedding
    bounds over random functions; records the sharpest observed ratio."""
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    g = graph
    report = {"violations": 0, "checks": []}
    h0 = float(min(g.h1.min(), g.h2.min()))
    mu0 = float(g.mu.min())
    for l in l_set:
        for m in m_set:
            spec = spaces.NormSpec("finite_full", m=m, l=l, channel="h1")
            k_cf = spaces.closed_form_constant(g, spec, "sup")
            sharpest = 0.0
            done = 0
            while done < samples:
                nb = min(batch, samples - done)
                funcs = rng.standard_normal((nb, g.n)) \
                    * rng.uniform(0.1, 10.0, size=(nb, 1))
                norms = _batch_norms(g, funcs, m, l, g.h1)
                sup = np.max(np.abs(funcs), axis=1)
                live = norms > 0
                ratios = sup[live] / norms[live]
                if ratios.size:
                    sharpest = max(sharpest, float(np.max(ratios)))
                report["violations"] += int(np.sum(ratios > k_cf * (1 + 1e-12)))
                done += nb
            report["checks"].append({
                "bound": "finite_sup", "m": m, "l": l, "constant": k_cf,
                "sharpest_ratio_over_bound": sharpest / k_cf,
            })
        # wh-mode bounds on the truncation (m = 1)
        k_sup = 1.0 / (h0 * mu0) ** (1.0 / l)
        h_min = np.minimum(g.h1, g.h2)
        funcs = rng.standard_normal((min(samples, 2000), g.n)) \
            * rng.uniform(0.1, 10.0, size=(min(samples, 2000), 1))
        norms = _batch_norms(g, funcs, 1, l, h_min)
        sup = np.max(np.abs(funcs), axis=1)
        live = norms > 0
        ratios = sup[live] / norms[live]
        report["violations"] += int(np.sum(ratios > k_sup * (1 + 1e-12)))
        report["checks"].append({
            "bound": "wh_sup", "l": l, "constant": k_sup,
            "sharpest_ratio_over_bound": float(np.max(ratios)) / k_sup,
        })
        for r in r_set:
            if r < l:
                continue
            k_r = mu0 ** ((l - r) / (l * r)) * h0 ** (-1.0 / l)
            lr = (np.abs(funcs) ** r @ g.mu) ** (1.0 / r)
            ratios = lr[live] / norms[live]
            report["violations"] += int(np.sum(ratios > k_r * (1 + 1e-12)))
            report["checks"].append({
                "bound": "wh_lr", "l": l, "r": r, "constant": k_r,
                "sharpest_ratio_over_bound": float(np.max(ratios)) / k_r,
            })
    report["passed"] = report["violations"] == 0
    return report


# -- sublevel ratio function phi(r) ----------------------------------------


def _project_to_sublevel(problem, x, r, slack=1.0 - 1e-9):
    """Scale x so that Phi(x) <= r (Phi is strictly increasing along rays)."""
    if problem.phi(x) <= r * slack:
        return x
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if problem.phi(mid * x) <= r * slack:
            lo = mid
        else:
            hi = mid
    return lo * x


def estimate_varphi(graph, spec, r, budget=200, n_starts=8, seed=0,
                    partition=None):
    """Heuristic estimate of the sublevel ratio

        phi(r) = inf_{Phi(u) <= r} (sup_{Phi <= r} Psi - Psi(u)) / (r - Phi(u)).

    The inner sup is estimated by projected multi-start ascent of Psi on the
    sublevel set, the outer inf by multi-start descent of the ratio.  The
    running sup is updated with every state the outer descent visits, which
    keeps the numerator (and the estimate) nonnegative.
    """
    if r <= 0:
        raise ParameterError("phi(r) needs r > 0 (= inf Phi)")
    problem = energy.build_problem(graph, spec, partition)
    rng = np.random.default_rng(seed)
    dim = problem.dim

    sup_psi = problem.psi(np.zeros(dim))  # = 0 under (F1)
    # inner sup by projected ascent
    for k in range(n_starts):
        x = rng.standard_normal(dim)
        x = _project_to_sublevel(problem, x, r)
        step = 1.0
        val = problem.psi(x)
        sup_psi = max(sup_psi, val)
        for _ in range(budget):
            gpsi = _psi_gradient(problem, x)
            gn = np.linalg.norm(gpsi)
            if gn < 1e-14:
                break
            improved = False
            while step > 1e-12:
                xn = _project_to_sublevel(problem, x + step * gpsi / gn, r)
                vn = problem.psi(xn)
                if vn > val + 1e-15:
                    x, val = xn, vn
                    improved = True
                    step *= 1.5
                    break
                step *= 0.5
            if not improved:
                break
            sup_psi = max(sup_psi, val)

    # outer inf of the ratio
    def ratio(x):
        ph = problem.phi(x)
        if ph >= r:
            return math.inf
        num = max(sup_psi - problem.psi(x), 0.0)
        return num / (r - ph)

    best = ratio(np.zeros(dim))  # = sup_psi / r at the zero state
    for k in range(n_starts):
        x = _project_to_sublevel(problem, rng.standard_normal(dim), r, slack=0.5)
        val = ratio(x)
        step = 0.5
        for _ in range(budget):
            grad = _ratio_gradient(problem, x, r, sup_psi)
            gn = np.linalg.norm(grad)
            if gn < 1e-14:
                break
            improved = False
            while step > 1e-12:
                xn = x - step * grad / gn
                ph = problem.phi(xn)
                if ph < r * (1.0 - 1e-9):
                    sup_psi = max(sup_psi, problem.psi(xn))
                    vn = ratio(xn)
                    if vn < val - 1e-15:
                        x, val = xn, vn
                        improved = True
                        step *= 1.5
                        break
                step *= 0.5
            if not improved:
                break
        best = min(best, ratio(x))
    best = min(best, sup_psi / r)
    return {"r": r, "estimate": max(best, 0.0), "sup_psi": sup_psi,
            "heuristic": True}


def _psi_gradient(problem, x):
    """Gradient of Psi alone in the free coordinates."""
    g = problem.graph
    s = problem.spec
    if s.model is None:
        return np.zeros(problem.dim)
    u, v = problem.unpack(x)
    t_arg = v if s.arity == 2 else None
    mask = np.ones(g.n)
    if problem.psi_indices is not None:
        mask = np.zeros(g.n)
        mask[problem.psi_indices] = 1.0
    parts = [(g.mu * mask * s.model.d_s(g, u, t_arg))[problem.free_u]]
    if s.arity == 2:
        parts.append((g.mu * mask * s.model.d_t(g, u, t_arg))[problem.free_v])
    return np.concatenate(parts)


def _phi_gradient(problem, x):
    lam = problem.spec.lam
    gi = problem.gradient(x)
    return gi + lam * _psi_gradient(problem, x)


def _ratio_gradient(problem, x, r, sup_psi):
    ph = problem.phi(x)
    ps = problem.psi(x)
    num = max(sup_psi - ps, 0.0)
    den = r - ph
    gpsi = _psi_gradient(problem, x)
    gphi = _phi_gradient(problem, x)
    return (-gpsi * den + num * gphi) / (den * den)


def estimate_gamma(graph, spec, r_grid, budget=200, seed=0, partition=None):
    """Finite proxy for liminf_r phi(r): minimum of phi estimates over the
    10 largest r values of the grid.  Flagged heuristic."""
    r_grid = sorted(float(r) for r in r_grid)
    tail = r_grid[-10:]
    rows = [estimate_varphi(graph, spec, r, budget=budget, seed=seed,
                            partition=partition) for r in tail]
    return {"estimate": min(row["estimate"] for row in rows),
            "rows": rows, "heuristic": True}
