"""Batch driver: load graph / system / solver configs and emit reports.

Commands:

    check      identity and embedding verification on a graph
    constants  admissible-interval report for a system
    solve      multi-start critical point search
    sweep      solve over a lambda grid, CSV output
    probe      unboundedness probe along the explicit test states

Reports are JSON (CSV for sweep tables) with a schema version and sha256
hashes of every input file; seeded runs are byte-reproducible.  Exit codes:
0 ok, 2 parse or validation failure, 3 structural hypothesis failure,
4 no critical point found.
"""

import argparse
import csv
import hashlib
import io
import json
import sys

import numpy as np

from . import diagnostics, energy, graphs, solver
from .exceptions import GraphVarError, HypothesisError

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_HYPOTHESIS = 3
EXIT_NO_SOLUTION = 4


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _hashes(args):
    out = {}
    for name in ("graph", "system", "solver"):
        path = getattr(args, name, None)
        if path:
            out[name] = _sha256(path)
    return out


def _emit(report, out_path):
    text = json.dumps(report, sort_keys=True, indent=2,
                      allow_nan=True, default=float) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _grid(text):
    """Parse 'a:b:n' into n ascending values (geometric when a > 0)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("grid must be 'a:b:n'")
    a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ValueError("grid needs n >= 1")
    if n == 1:
        return [a]
    if a > 0 and b > 0:
        vals = np.geomspace(a, b, n)
    else:
        vals = np.linspace(a, b, n)
    return sorted(float(v) for v in vals)


def _load_setup(args, need_system=True, need_solver=False):
    graph, omega = graphs.load_graph(args.graph)
    spec = None
    partition = None
    if need_system:
        spec = energy.SystemSpec.from_config(_load_json(args.system))
        if spec.system == "dirichlet_poly":
            if omega is None:
                raise GraphVarError(
                    "dirichlet system needs a 'domain' block in the graph file")
            partition = graphs.partition_domain(
                graph, omega, max(spec.m1, spec.m2))
    config = None
    if need_solver:
        config = (solver.SolverConfig.from_config(_load_json(args.solver))
                  if args.solver else solver.SolverConfig())
        if args.seed is not None:
            config.seed = args.seed
    return graph, omega, spec, partition, config


# -- commands --------------------------------------------------------------


def cmd_check(args):
    graph, _ = graphs.load_graph(args.graph)
    seed = args.seed if args.seed is not None else 0
    identities = diagnostics.check_identities(graph, trials=args.trials,
                                              seed=seed)
    embeddings = diagnostics.check_embeddings(
        graph, samples=max(args.trials * 10, 100), seed=seed)
    ok = identities["all_passed"] and embeddings["passed"]
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "check",
        "config_hashes": _hashes(args),
        "seed": seed,
        "identities": identities,
        "embeddings": embeddings,
        "passed": ok,
    }
    _emit(report, args.out)
    return EXIT_OK if ok else 1


def cmd_constants(args):
    graph, omega, spec, partition, _ = _load_setup(args)
    interval = energy.interval_constants(graph, spec, partition=partition)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "constants",
        "config_hashes": _hashes(args),
        "interval": interval.to_dict(),
    }
    _emit(report, args.out)
    return EXIT_OK


def _run_solve(graph, spec, partition, config, with_interval=True):
    interval = None
    if with_interval and spec.model is not None:
        try:
            interval = energy.interval_constants(graph, spec,
                                                 partition=partition)
        except HypothesisError:
            interval = None
    report, problem = solver.solve(graph, spec, partition=partition,
                                   config=config, interval=interval)
    return report, problem, interval


def cmd_solve(args):
    graph, omega, spec, partition, config = _load_setup(args, need_solver=True)
    report, problem, _ = _run_solve(graph, spec, partition, config)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "solve",
        "config_hashes": _hashes(args),
        "seed": config.seed,
        "lambda": spec.lam,
        "report": report.to_dict(problem),
    }
    _emit(payload, args.out)
    return EXIT_OK if report.points else EXIT_NO_SOLUTION


def cmd_sweep(args):
    graph, omega, spec, partition, config = _load_setup(args, need_solver=True)
    lams = _grid(args.lambda_grid)
    interval = None
    if spec.model is not None:
        try:
            interval = energy.interval_constants(graph, spec,
                                                 partition=partition)
        except HypothesisError:
            interval = None
    rows = []
    for lam in lams:
        run_spec = energy.SystemSpec(
            system=spec.system, p=spec.p, q=spec.q, m1=spec.m1, m2=spec.m2,
            lam=lam, model=spec.model, arity=spec.arity)
        report, problem = solver.solve(graph, run_spec, partition=partition,
                                       config=config, interval=interval)
        inside = bool(interval is not None and interval.valid
                      and interval.lambda_lo < lam < interval.lambda_hi)
        rows.append({
            "lambda": lam,
            "in_interval": inside,
            "n_points": len(report.points),
            "phi_values": [cp.phi for cp in report.points],
        })
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "in_interval", "n_points", "phi_values"])
    for row in rows:
        writer.writerow([
            "%.17g" % row["lambda"],
            int(row["in_interval"]),
            row["n_points"],
            ";".join("%.12g" % v for v in row["phi_values"]),
        ])
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        from . import plots
        target = (args.out or "sweep") + ".png"
        plots.plot_sweep(rows, target)
    return EXIT_OK


def cmd_probe(args):
    graph, omega, spec, partition, _ = _load_setup(args)
    amps = _grid(args.amp_grid)
    if args.probe == "constant":
        trace = solver.probe_unbounded_constant(graph, spec, amps)
    else:
        if args.x0 is not None:
            x0 = args.x0
        else:
            i0, _, _ = energy.minimizing_vertex(graph, spec.p, spec.q,
                                                spec.arity)
            x0 = graph.ids[i0]
        trace = solver.probe_unbounded_spike(graph, spec, x0, amps)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "probe",
        "config_hashes": _hashes(args),
        "probe": trace,
    }
    _emit(report, args.out)
    if args.plot:
        from . import plots
        target = (args.out or "probe") + ".png"
        plots.plot_probe(trace["rows"], target, floor=trace["floor"])
    return EXIT_OK


# -- argument parsing ------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="graphvar",
        description="Discrete variational toolkit on weighted graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, system=False, solver_cfg=False):
        p.add_argument("--graph", required=True, help="graph JSON file")
        if system:
            p.add_argument("--system", required=True, help="system JSON file")
        if solver_cfg:
            p.add_argument("--solver", help="solver config JSON file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="report file (stdout when omitted)")

    p = sub.add_parser("check", help="verify identities and embedding bounds")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("constants", help="admissible-interval report")
    common(p, system=True)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("solve", help="multi-start critical point search")
    common(p, system=True, solver_cfg=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve over a lambda grid (CSV)")
    common(p, system=True, solver_cfg=True)
    p.add_argument("--lambda-grid", required=True, metavar="a:b:n")
    p.add_argument("--plot", action="store_true",
                   help="also render the sweep as a PNG next to the CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("probe", help="unboundedness probe trace")
    common(p, system=True)
    p.add_argument("--probe", choices=("constant", "spike"), required=True)
    p.add_argument("--x0", help="spike vertex id (defaults to the mass argmin)")
    p.add_argument("--amp-grid", default="0.5:2000:60", metavar="a:b:n")
    p.add_argument("--plot", action="store_true",
                   help="also render the trace as a PNG next to the report")
    p.set_defaults(func=cmd_probe)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HypothesisError as exc:
        print("hypothesis failure: %s" % exc, file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (GraphVarError, OSError, ValueError, KeyError,
            json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
