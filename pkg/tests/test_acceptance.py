"""Top-level acceptance suite.

Each test prints one pass/fail line with its headline number so the suite
doubles as a release report (run with pytest -s to see them inline).
"""

import csv
import json
import math
import time

import numpy as np
import pytest

from graphvar import (
    calculus,
    cli,
    diagnostics,
    energy,
    graphs,
    models,
    solver,
    spaces,
)

from conftest import data_path, random_connected_graph


def _line(name, ok, detail):
    print("[acceptance] %-22s %s  (%s)" % (name, "PASS" if ok else "FAIL", detail))
    assert ok, detail


def test_01_identity_suite():
    t0 = time.time()
    rng = np.random.default_rng(100)
    worst = 0.0
    for _ in range(100):
        g = random_connected_graph(rng, 3, 30)
        report = diagnostics.check_identities(
            g, trials=10, l_set=(2.0, 2.5, 3.0, 4.0), seed=int(rng.integers(1 << 31)))
        for key in ("gamma_decomposition", "summation_by_parts",
                    "l2_reduces_to_laplacian", "mu_symmetry"):
            worst = max(worst, report[key]["max_rel_err"])
    elapsed = time.time() - t0
    ok = worst <= 1e-10 and elapsed <= 10.0
    _line("identity-suite", ok,
          "max rel err %.2e, %.1fs over 100 graphs" % (worst, elapsed))


def test_02_embedding_suite():
    t0 = time.time()
    rng = np.random.default_rng(200)
    violations = 0
    numeric_excess = 0
    for k in range(20):
        g = random_connected_graph(rng, 3, 30)
        rep = diagnostics.check_embeddings(
            g, samples=10000, l_set=(2.0, 3.0), m_set=(1, 2),
            seed=int(rng.integers(1 << 31)))
        violations += rep["violations"]
        if k < 5:
            for m in (1, 2):
                for l in (2.0, 3.0):
                    spec = spaces.NormSpec("finite_full", m=m, l=l)
                    cf = spaces.closed_form_constant(g, spec, "sup")
                    num = spaces.numeric_constant(g, spec, "sup", restarts=3,
                                                  iters=100)
                    if num > cf * (1 + 1e-10):
                        numeric_excess += 1
    elapsed = time.time() - t0
    ok = violations == 0 and numeric_excess == 0 and elapsed <= 30.0
    _line("embedding-suite", ok,
          "%d violations, %d numeric excesses, %.1fs" % (violations, numeric_excess, elapsed))


def test_03_gradient_correctness():
    t0 = time.time()
    rng = np.random.default_rng(300)
    g, _ = graphs.load_graph(data_path("ten_vertex.json"))
    model = models.PowerModel(ps=3.0, qt=3.0)
    omega = ["o0", "o1", "o2", "o3", "o4", "i0", "i1", "i2"]
    h = 1e-6
    worst = 0.0
    n_states = 0
    for system in ("finite_poly", "dirichlet_poly", "pq_wh"):
        for p in (2.0, 2.5, 3.0):
            orders = (1, 2) if system == "dirichlet_poly" else (1,)
            for m in orders:
                part = (graphs.partition_domain(g, omega, m)
                        if system == "dirichlet_poly" else None)
                spec = energy.SystemSpec(system=system, p=p, q=p, m1=m, m2=m,
                                         lam=0.8, model=model)
                prob = energy.build_problem(g, spec, part)
                # 100 random states per (system, p) combination, split over
                # the order variants in Dirichlet mode
                for _ in range(100 // len(orders)):
                    x = rng.standard_normal(prob.dim) * rng.uniform(0.2, 3.0)
                    gan = prob.gradient(x)
                    gfd = np.empty_like(gan)
                    for i in range(prob.dim):
                        e = np.zeros(prob.dim)
                        e[i] = h
                        gfd[i] = (prob.total(x + e) - prob.total(x - e)) / (2 * h)
                    err = (np.linalg.norm(gan - gfd)
                           / max(np.linalg.norm(gfd), 1.0))
                    worst = max(worst, err)
                    n_states += 1
    elapsed = time.time() - t0
    ok = worst <= 1e-5 and elapsed <= 60.0
    _line("gradient-correctness", ok,
          "max rel err %.2e over %d states, %.1fs" % (worst, n_states, elapsed))


def test_04_closed_form_probes():
    t0 = time.time()
    rng = np.random.default_rng(400)
    worst_spike = 0.0
    worst_const = 0.0
    for _ in range(100):
        g = random_connected_graph(rng, 3, 20)
        p, q = 2.0, 2.5
        spec = energy.SystemSpec(system="pq_wh", p=p, q=q, lam=0.0,
                                 model=models.PowerModel(ps=4.0, qt=4.0))
        x0 = g.ids[int(rng.integers(0, g.n))]
        tr = solver.probe_unbounded_spike(g, spec, x0, [0.7, 3.1])
        worst_spike = max(worst_spike,
                          max(r["phi_rel_err"] for r in tr["rows"]),
                          max(r["gradient_rel_err"] for r in tr["rows"]))
        cspec = energy.SystemSpec(system="finite_poly", p=p, q=q, lam=0.0,
                                  model=models.PowerModel(ps=4.0, qt=4.0))
        tc = solver.probe_unbounded_constant(g, cspec, [0.7, 3.1])
        for row in tc["rows"]:
            err = (abs(row["phi"] - row["phi_potential_only"])
                   / max(1.0, abs(row["phi_potential_only"])))
            worst_const = max(worst_const, err)

    g, _ = graphs.load_graph(data_path("ten_vertex.json"))
    spec = energy.SystemSpec.from_config(
        json.load(open(data_path("system_power.json"))))
    amps = list(np.geomspace(0.5, 2000.0, 40))
    div_const = solver.probe_unbounded_constant(g, spec, amps)
    spec_wh = energy.SystemSpec(system="pq_wh", p=2.0, q=2.0, lam=1.0,
                                model=spec.model)
    i0, _, _ = energy.minimizing_vertex(g, 2.0, 2.0)
    div_spike = solver.probe_unbounded_spike(g, spec_wh, g.ids[i0], amps)
    elapsed = time.time() - t0
    ok = (worst_spike <= 1e-10 and worst_const <= 1e-12
          and div_const["diverged_below_floor"]
          and div_spike["diverged_below_floor"] and elapsed <= 10.0)
    _line("closed-form-probes", ok,
          "spike err %.1e, const err %.1e, diverged %s/%s, %.1fs"
          % (worst_spike, worst_const, div_const["diverged_below_floor"],
             div_spike["diverged_below_floor"], elapsed))


def test_05_hand_constants(tmp_path):
    system = tmp_path / "system.json"
    system.write_text(json.dumps({
        "system": "pq_wh", "p": 2.0, "q": 2.0, "lambda": 1.0,
        "model": {"catalog": "power", "params": {"ps": 4.0, "qt": 4.0}},
    }))
    out = tmp_path / "const.json"
    code = cli.main(["constants", "--graph", data_path("two_vertex.json"),
                     "--system", str(system), "--out", str(out)])
    iv = json.loads(out.read_text())["interval"]
    g, _ = graphs.load_graph(data_path("two_vertex.json"))
    spec2 = spaces.NormSpec("finite_full", m=1, l=2.0)
    k_l = spaces.closed_form_constant(g, spec2, "sup")
    fin = energy.interval_constants(
        g, energy.SystemSpec(system="finite_poly", p=2.0, q=2.0, lam=1.0,
                             model=models.PowerModel(ps=4.0, qt=4.0)))
    ok = (code == 0 and iv["rho"] == 1.0 and iv["K"] == 1.0
          and iv["details"]["M1"]["a"] == 2.0 and iv["details"]["M2"]["a"] == 2.0
          and fin.rho == 1.0 and fin.K == 1.0 and k_l == 1.0)
    _line("hand-constants", ok,
          "rho=%g K=%g M1(a)=%g M2(a)=%g K_l=%g"
          % (iv["rho"], iv["K"], iv["details"]["M1"]["a"],
             iv["details"]["M2"]["a"], k_l))


def test_06_multiplicity_experiment(tmp_path):
    g, _ = graphs.load_graph(data_path("ten_vertex.json"))
    spec = energy.SystemSpec.from_config(
        json.load(open(data_path("system_oscillator.json"))))
    iv = energy.interval_constants(g, spec)
    assert iv.valid and 0 < iv.A < iv.B

    system = tmp_path / "system_mid.json"
    cfg = json.load(open(data_path("system_oscillator.json")))
    cfg["lambda"] = iv.midpoint
    system.write_text(json.dumps(cfg))
    out = tmp_path / "solve.json"
    t0 = time.time()
    code = cli.main(["solve", "--graph", data_path("ten_vertex.json"),
                     "--system", str(system),
                     "--solver", data_path("solver_default.json"),
                     "--out", str(out)])
    elapsed = time.time() - t0
    report = json.loads(out.read_text())["report"]
    n_mid = len(report["critical_points"])
    residuals = [cp["residual"] for cp in report["critical_points"]]

    # trend over the sweep grid pinned to (near-zero, midpoint, lambda_hi*10)
    lo = iv.midpoint ** 2 / (iv.lambda_hi * 10.0)
    grid = "%.17g:%.17g:3" % (lo, iv.lambda_hi * 10.0)
    out_csv = tmp_path / "sweep.csv"
    code2 = cli.main(["sweep", "--graph", data_path("ten_vertex.json"),
                      "--system", data_path("system_oscillator.json"),
                      "--solver", data_path("solver_default.json"),
                      "--lambda-grid", grid, "--out", str(out_csv)])
    rows = list(csv.DictReader(out_csv.read_text().splitlines()))
    counts = [int(r["n_points"]) for r in rows]
    inside = [r["in_interval"] == "1" for r in rows]
    n_interior = max(c for c, i in zip(counts, inside) if i)
    trend_ok = all(c <= n_interior for c, i in zip(counts, inside) if not i)

    ok = (code == 0 and code2 == 0 and n_mid >= 3 and elapsed <= 60.0
          and max(residuals) <= 1e-8 and trend_ok)
    _line("multiplicity", ok,
          "%d points at midpoint in %.1fs, sweep counts %s, trend %s"
          % (n_mid, elapsed, counts, trend_ok))


def test_07_sublevel_ratio_chain():
    rng = np.random.default_rng(700)
    worst_margin = -math.inf
    for _ in range(5):
        g = random_connected_graph(rng, 3, 12)
        p = 2.0
        model = models.PowerModel(ps=4.0, qt=4.0)
        spec = energy.SystemSpec(system="finite_poly", p=p, q=p, lam=1.0,
                                 model=model)
        K = max(1.0 / (g.mu.min() * g.h1.min()),
                1.0 / (g.mu.min() * g.h2.min()))
        two_pow = 2.0 ** (p - 1.0)
        for c_n in (4.0, 16.0, 64.0):
            r_n = c_n ** p / (p * two_pow * K)
            est = diagnostics.estimate_varphi(
                g, spec, r_n, budget=80, n_starts=4,
                seed=int(rng.integers(1 << 31)))["estimate"]
            # sup of F over the l1 ball of radius c_n is c_n^4 at a corner
            bound = p * K * two_pow * (g.total_measure * c_n ** 4.0) / c_n ** p
            margin = est / bound - 1.0
            worst_margin = max(worst_margin, margin)
    ok = worst_margin <= 0.05
    _line("sublevel-ratio-chain", ok,
          "worst margin over bound %+.2f%%" % (100 * worst_margin))


def test_08_determinism(tmp_path):
    solver_cfg = tmp_path / "solver.json"
    solver_cfg.write_text(json.dumps({"seed": 7, "n_random_starts": 4,
                                      "max_iter": 800}))
    pairs = []
    for tag in ("x", "y"):
        out = tmp_path / ("solve_%s.json" % tag)
        cli.main(["solve", "--graph", data_path("ten_vertex.json"),
                  "--system", data_path("system_oscillator.json"),
                  "--solver", str(solver_cfg), "--out", str(out)])
        pairs.append(out.read_bytes())
    solve_same = pairs[0] == pairs[1]

    checks = []
    for tag in ("x", "y"):
        out = tmp_path / ("check_%s.json" % tag)
        cli.main(["check", "--graph", data_path("two_vertex.json"),
                  "--seed", "3", "--trials", "10", "--out", str(out)])
        checks.append(out.read_bytes())
    check_same = checks[0] == checks[1]

    sweeps = []
    for tag in ("x", "y"):
        out = tmp_path / ("sweep_%s.csv" % tag)
        cli.main(["sweep", "--graph", data_path("ten_vertex.json"),
                  "--system", data_path("system_power.json"),
                  "--solver", str(solver_cfg),
                  "--lambda-grid", "0.001:0.01:3", "--out", str(out)])
        sweeps.append(out.read_bytes())
    sweep_same = sweeps[0] == sweeps[1]

    ok = solve_same and check_same and sweep_same
    _line("determinism", ok,
          "solve %s, check %s, sweep %s" % (solve_same, check_same, sweep_same))
