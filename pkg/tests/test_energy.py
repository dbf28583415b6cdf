import math

import numpy as np
import pytest

from graphvar import calculus, energy, graphs, models
from graphvar.exceptions import (
    ConstraintError,
    HypothesisError,
    ParameterError,
)

from conftest import random_connected_graph


def power_model(ps=4.0, qt=4.0):
    return models.PowerModel(ps=ps, qt=qt)


def test_spec_validation():
    with pytest.raises(ParameterError):
        energy.SystemSpec(system="nope")
    with pytest.raises(ParameterError):
        energy.SystemSpec(system="finite_poly", p=1.0)
    with pytest.raises(ParameterError):
        energy.SystemSpec(system="pq_wh", p=1.5)
    with pytest.raises(ParameterError):
        energy.SystemSpec(system="pq_wh", m1=2)
    with pytest.raises(ParameterError):
        energy.SystemSpec(system="finite_poly", lam=-1.0)
    spec = energy.SystemSpec(system="finite_poly", lam=0.0)
    assert spec.delta == 2.0


def test_spec_from_config():
    spec = energy.SystemSpec.from_config({
        "system": "finite_poly", "p": 2.5, "q": 3.0, "lambda": 0.4,
        "model": {"catalog": "power", "params": {"ps": 4.0, "qt": 4.0}},
    })
    assert spec.p == 2.5 and spec.lam == 0.4
    assert spec.model.name == "power"
    assert spec.delta == 2.5


def test_dirichlet_needs_partition(petersen):
    spec = energy.SystemSpec(system="dirichlet_poly")
    with pytest.raises(ParameterError):
        energy.build_problem(petersen, spec)


def test_dirichlet_state_constraint(petersen):
    omega = ["o0", "o1", "o2", "o3", "o4", "i0", "i1"]
    part = graphs.partition_domain(petersen, omega)
    spec = energy.SystemSpec(system="dirichlet_poly", model=power_model())
    prob = energy.build_problem(petersen, spec, part)
    bad = np.ones(petersen.n)
    with pytest.raises(ConstraintError):
        energy.total_energy(prob, (bad, bad))


def test_constant_state_phi_closed_form(rng):
    # constant states kill every gradient term, so Phi is the potential
    # integral alone
    for _ in range(10):
        g = random_connected_graph(rng)
        p, q = 2.0, 3.0
        spec = energy.SystemSpec(system="finite_poly", p=p, q=q,
                                 model=power_model(), lam=0.0)
        prob = energy.build_problem(g, spec)
        xi, eta = 1.7, -0.6
        u = np.full(g.n, xi)
        v = np.full(g.n, eta)
        got = energy.phi(prob, (u, v))
        expect = (abs(xi) ** p / p * calculus.integrate_values(g, g.h1)
                  + abs(eta) ** q / q * calculus.integrate_values(g, g.h2))
        assert got == pytest.approx(expect, rel=1e-12)


def test_spike_mass_two_vertex(two_vertex):
    # deg = 1, mu = 1, h = 1: M = (1/2)^(e/2) + 1 + (1/2)^(e/2)
    for e in (2.0, 3.0):
        expect = 2.0 * (0.5) ** (e / 2.0) + 1.0
        assert energy.spike_mass(two_vertex, "a", e) == pytest.approx(expect)
    assert energy.spike_mass(two_vertex, "a", 2.0) == pytest.approx(2.0)


def test_spike_phi_matches_masses(rng):
    for _ in range(10):
        g = random_connected_graph(rng)
        p, q = 2.0, 2.5
        spec = energy.SystemSpec(system="pq_wh", p=p, q=q,
                                 model=power_model(), lam=0.0)
        prob = energy.build_problem(g, spec)
        i0 = int(rng.integers(0, g.n))
        xi, eta = 2.3, 1.1
        u = np.zeros(g.n)
        v = np.zeros(g.n)
        u[i0] = xi
        v[i0] = eta
        m1 = energy.spike_mass(g, g.ids[i0], p, "h1")
        m2 = energy.spike_mass(g, g.ids[i0], q, "h2")
        expect = xi ** p * m1 / p + eta ** q * m2 / q
        assert energy.phi(prob, (u, v)) == pytest.approx(expect, rel=1e-10)


def test_minimizing_vertex_tie_and_failure():
    # mu asymmetric so that M1 and M2 disagree on their argmin
    g = graphs.WeightedGraph(["a", "b", "c"], [1.0, 1.0, 1.0],
                             [("a", "b", 1.0), ("b", "c", 1.0)])
    i0, m1, m2 = energy.minimizing_vertex(g, 2.0, 2.0)
    assert g.ids[i0] in ("a", "c")

    g2 = graphs.WeightedGraph(
        ["a", "b"], [1.0, 1.0], [("a", "b", 1.0)],
        h1=[0.5, 2.0], h2=[2.0, 0.5])
    with pytest.raises(HypothesisError):
        energy.minimizing_vertex(g2, 2.0, 2.0)


def test_gradient_vs_fd_all_systems(petersen, rng):
    model = power_model(3.0, 3.0)
    omega = ["o0", "o1", "o2", "o3", "o4", "i0", "i1", "i2"]
    h = 1e-6
    cases = [
        ("finite_poly", 1, None), ("finite_poly", 2, None),
        ("dirichlet_poly", 1, omega), ("dirichlet_poly", 2, omega),
        ("pq_wh", 1, None),
    ]
    for system, m, om in cases:
        part = graphs.partition_domain(petersen, om, m) if om else None
        spec = energy.SystemSpec(system=system, p=2.5, q=2.5, m1=m, m2=m,
                                 lam=0.8, model=model)
        prob = energy.build_problem(petersen, spec, part)
        x = rng.standard_normal(prob.dim)
        gan = prob.gradient(x)
        for i in range(prob.dim):
            e = np.zeros(prob.dim)
            e[i] = h
            fd = (prob.total(x + e) - prob.total(x - e)) / (2 * h)
            assert gan[i] == pytest.approx(fd, rel=1e-5, abs=1e-5)


def test_zero_is_critical(petersen):
    spec = energy.SystemSpec(system="finite_poly", model=power_model(),
                             lam=1.0)
    prob = energy.build_problem(petersen, spec)
    g0 = prob.gradient(np.zeros(prob.dim))
    assert np.linalg.norm(g0) == 0.0


def test_interval_constants_finite(two_vertex):
    spec = energy.SystemSpec(system="finite_poly", p=2.0, q=2.0,
                             model=power_model(), lam=1.0)
    iv = energy.interval_constants(two_vertex, spec)
    assert iv.rho == pytest.approx(1.0)
    assert iv.K == pytest.approx(1.0)
    assert iv.two_power_factor == 2.0
    assert iv.details["embedding_K_l"]["h1"] == pytest.approx(1.0)


def test_interval_constants_wh_hand_values(two_vertex):
    spec = energy.SystemSpec(system="pq_wh", p=2.0, q=2.0,
                             model=power_model(), lam=1.0)
    iv = energy.interval_constants(two_vertex, spec)
    assert iv.details["M1"]["a"] == pytest.approx(2.0)
    assert iv.details["M2"]["a"] == pytest.approx(2.0)
    assert iv.rho == pytest.approx(1.0)
    assert iv.K == pytest.approx(1.0)


def test_interval_scalar_has_no_two_power(two_vertex):
    spec = energy.SystemSpec(system="finite_poly", p=2.0, arity=1,
                             model=models.PowerModel(ps=4.0, qt=4.0, arity=1),
                             lam=1.0)
    iv = energy.interval_constants(two_vertex, spec)
    assert iv.two_power_factor == 1.0


def test_interval_invalid_when_no_gap(two_vertex):
    spec = energy.SystemSpec(system="finite_poly", model=power_model(),
                             lam=1.0)
    iv = energy.interval_constants(two_vertex, spec, ab_override=(4.0, 1.0))
    assert not iv.valid
    assert iv.A == 4.0 and iv.B == 1.0


def test_interval_override_provenance(two_vertex):
    spec = energy.SystemSpec(system="finite_poly", model=power_model(),
                             lam=1.0)
    iv = energy.interval_constants(two_vertex, spec, ab_override=(1.0, 8.0))
    assert iv.a_b_provenance == "user_override"
    assert iv.A == 1.0 and iv.B == 8.0
    assert iv.valid
    assert iv.lambda_lo == pytest.approx(iv.rho / 8.0)
    assert iv.lambda_hi == pytest.approx(1.0 / (2.0 * 2.0 * iv.K * 1.0))
    assert iv.midpoint == pytest.approx(0.5 * (iv.lambda_lo + iv.lambda_hi))


def test_interval_dirichlet_lambda_lo(petersen):
    omega = ["o0", "o1", "o2", "o3", "o4", "i0", "i1"]
    part = graphs.partition_domain(petersen, omega)
    spec = energy.SystemSpec(system="dirichlet_poly", model=power_model(),
                             lam=1.0)
    iv = energy.interval_constants(petersen, spec, partition=part,
                                   ab_override=(1.0, 4.0),
                                   embedding_kwargs={"restarts": 3,
                                                     "iters": 100})
    assert iv.rho == 1.0
    assert iv.lambda_lo == pytest.approx(0.25)
