"""Command line interface: ``nlcauchy {expm,solve,table1,converge,bench}``.

Exit codes: 0 success, 2 usage/config error, 3 numerical acceptance failure,
4 divergence.  Worker counts are capped by ``NLCAUCHY_MAX_WORKERS``.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
import time

import numpy as np

from .config import RunConfig, load_config
from .contour import ExpmEvaluator, SincQuadrature, default_strip, max_workers
from .estimator import make_backend, make_functional
from .exceptions import ConfigError, DivergenceError, NlcauchyError
from .hammerstein import (
    NonlocalProblem,
    err_metric,
    example_exact_solution,
    example_problem,
    fixed_point_solve,
)
from .operators import DiagonalOperator, ScalarOperator, SpectralParams, scaled_cgl_points

logger = logging.getLogger("nlcauchy")

EXIT_OK, EXIT_USAGE, EXIT_ACCEPTANCE, EXIT_DIVERGENCE = 0, 2, 3, 4

CSV_HEADER = ["N", "n", "mu", "err", "iters", "q_emp", "wall_ms", "solves"]

# Strip width that reproduces the published N-dependence (pi d alpha ~ 2.4).
TABLE1_D = math.pi / 4
TABLE1_ROWS = {
    (4, 8): 0.0859119243400000010,
    (8, 8): 0.0244950525900000000,
    (16, 8): 0.00345794666699999987,
    (32, 16): 0.000328787487900000005,
    (64, 16): 0.00000833843948899999922,
    (128, 32): 0.0000000515513076299999962,
    (256, 32): 3.68083566999999982e-11,
    (512, 64): 1.32334447899999999e-15,
}
FLOOR = 1e-13
TABLE1_FACTOR = 10.0
SLOPE_TOL = 0.25


def fmt(x):
    """Round-trip decimal (17 significant digits); ``nan`` for missing values."""
    if x is None:
        return "nan"
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    text = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def slope_fit(Ns, errors, floor=FLOOR):
    """Fit ``log E = a - b sqrt(N + 1)`` over errors above ``floor``; return ``b``."""
    Ns = np.asarray(Ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = errors > floor
    if np.count_nonzero(keep) < 2:
        return math.nan
    return float(-np.polyfit(np.sqrt(Ns[keep] + 1), np.log(errors[keep]), 1)[0])


def _workers(cfg, args):
    return max_workers(args.workers if args.workers is not None else cfg["workers"])


def _spectral_override(backend, cfg):
    rho0, phi0 = cfg["spectral.rho0"], cfg["spectral.phi0"]
    if rho0 is None and phi0 is None:
        return None
    sp = backend.spectral_params()
    return SpectralParams(rho0=rho0 or sp.rho0, phi0=sp.phi0 if phi0 is None else phi0, M=sp.M)


def build_problem(cfg: RunConfig, mu=None, N=None, n=None, d=None):
    """Problem described by ``cfg``; the quadratic example datum for grid backends."""
    mu = cfg["functional.mu"] if mu is None else mu
    N = cfg["quadrature.N"] if N is None else N
    n = cfg["collocation.n"] if n is None else n
    d = cfg["spectral.d"] if d is None else d
    kind = cfg["backend.kind"]
    backend = make_backend(kind, cfg["backend.size"], cfg["backend.lambda"],
                           cfg["backend.eigenvalues"], cfg["backend.oversample"], cfg["output.m"])
    g = make_functional(cfg["functional.kind"], mu, list(cfg["functional.points"]),
                        list(cfg["functional.coefficients"]), cfg["functional.m"])
    if kind in ("sine", "fd"):
        # with g = 0 the reference solution belongs to the mu = 0 datum
        datum_mu = 0.0 if cfg["functional.kind"] == "zero" else mu
        prob = example_problem(mu=datum_mu, N=N, n=n, alpha=cfg["quadrature.alpha"], d=d,
                               margin=cfg["spectral.margin"], functional=g, backend=backend)
        prob.spectral = _spectral_override(backend, cfg)
        return prob
    u0 = backend.vector(np.ones(backend.dim))
    return NonlocalProblem(backend=backend, g=g, u0=u0, alpha=cfg["quadrature.alpha"], d=d, N=N,
                           n=n, margin=cfg["spectral.margin"],
                           spectral=_spectral_override(backend, cfg))


def _has_exact(problem, cfg):
    return cfg["backend.kind"] in ("sine", "fd") and cfg["functional.kind"] in ("zero", "quadratic")


def run_case(cfg, mu, N, n, d, workers, tol=None):
    """Solve one (N, n) case; returns a CSV row list and the solution."""
    problem = build_problem(cfg, mu=mu, N=N, n=n, d=d)
    system = problem.build(workers=workers)
    t0 = time.perf_counter()
    sol = fixed_point_solve(system, tol=tol or cfg["solver.tol"], max_iter=cfg["solver.max_iter"])
    wall = (time.perf_counter() - t0) * 1e3
    err = err_metric(sol, example_exact_solution, cfg["output.m"]) if _has_exact(problem, cfg) else math.nan
    rep = sol.report
    q = rep.q_emp[-1] if rep.q_emp else 0.0
    iters = rep.iterations_rel if rep.iterations_rel is not None else rep.iterations
    return [N, n, mu, err, iters, q, wall, rep.solves], sol


# ---------------------------------------------------------------- commands

def cmd_expm(cfg, args):
    kind = cfg["backend.kind"]
    Ns = cfg["quadrature.N_list"]
    ts = cfg["expm.t_list"]
    if not Ns or not ts:
        raise ConfigError("expm needs non-empty quadrature.N_list and expm.t_list")
    backend = make_backend(kind, cfg["backend.size"], cfg["backend.lambda"],
                           cfg["backend.eigenvalues"], cfg["backend.oversample"])
    if kind in ("sine", "fd"):
        # grid operators are compared in their eigenbasis, where exp(-A s) is explicit
        backend = DiagonalOperator(backend.eigenvalues.real)
    eig = np.array([backend.lam]) if isinstance(backend, ScalarOperator) else np.asarray(
        backend.eigenvalues)
    sp = _spectral_override(backend, cfg) or backend.spectral_params()
    d = cfg["spectral.d"] or default_strip(sp.phi0, cfg["spectral.margin"])
    alpha = cfg["quadrature.alpha"]
    v = backend.vector(np.ones(backend.dim))
    rows, sup = [], []
    for N in sorted(Ns):
        ev = ExpmEvaluator(backend, SincQuadrature.for_params(sp, alpha, N, d=d), _workers(cfg, args))
        approx = ev.apply_many_coords(ts, v, key="v")
        errs = [float(np.max(np.abs(approx[i] - np.exp(-eig * (t + 1))))) for i, t in enumerate(ts)]
        rows.extend([N, t, e] for t, e in zip(ts, errs))
        sup.append(max(errs))
    write_csv(args.out or cfg["output.path"], ["N", "t", "abs_error"], rows)
    b = slope_fit(sorted(Ns), sup)
    target = math.sqrt(math.pi * d * alpha)
    ok = math.isfinite(b) and abs(b - target) <= SLOPE_TOL * target
    print(f"expm: slope b={b:.4f} target={target:.4f} -> {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    if not ok:
        print("expm: FAIL slope-check", file=sys.stderr)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def _solve_rows(sol, cfg):
    x = scaled_cgl_points(cfg["output.m"])
    backend = sol.backend
    rows = []
    try:
        vals = sol.values_at(x)
    except NlcauchyError:
        vals = None
    for j, t in enumerate(sol.grid.nodes):
        if vals is None:
            for c, v in enumerate(sol.y[j].coords):
                rows.append([j, t, c, v.real, v.imag])
        else:
            rows.extend([j, t, xl, v.real, v.imag] for xl, v in zip(x, vals[j]))
    header = ["j", "t", "x" if vals is not None else "coord", "re", "im"]
    return header, rows, backend


def _report_rows(rep, err=None):
    rows = [
        ["iterations", rep.iterations],
        ["iterations_rel_1e-5", rep.iterations_rel if rep.iterations_rel is not None else "nan"],
        ["converged", "true" if rep.converged else "false"],
        ["stop_reason", rep.stop_reason],
        ["solves", rep.solves],
        ["g_p_norm", rep.g_p_norm],
    ]
    if err is not None:
        rows.append(["err", err])
    rows.extend([f"residual_{k + 1}", r] for k, r in enumerate(rep.residuals))
    rows.extend([f"q_emp_{k + 2}", q] for k, q in enumerate(rep.q_emp))
    return rows


def _report_path(out):
    return None if out in (None, "-") else out + ".report.csv"


def cmd_solve(cfg, args):
    problem = build_problem(cfg)
    system = problem.build(workers=_workers(cfg, args))
    out = args.out or cfg["output.path"]
    try:
        sol = fixed_point_solve(system, tol=cfg["solver.tol"], max_iter=cfg["solver.max_iter"])
    except DivergenceError as exc:
        write_csv(_report_path(out), ["key", "value"], _report_rows(exc.report))
        print(f"solve: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    err = err_metric(sol, example_exact_solution, cfg["output.m"]) if _has_exact(problem, cfg) else None
    header, rows, _ = _solve_rows(sol, cfg)
    write_csv(out, header, rows)
    write_csv(_report_path(out), ["key", "value"], _report_rows(sol.report, err))
    return EXIT_OK


def _table_d(cfg):
    return cfg["spectral.d"] if cfg["spectral.d"] is not None else TABLE1_D


def table1_row_ok(N, n, err, iters):
    ref = TABLE1_ROWS[(N, n)]
    if ref < FLOOR * 1000:
        return err <= 1e-12 and iters <= 5
    return ref / TABLE1_FACTOR <= err <= ref * TABLE1_FACTOR and iters <= 5


def cmd_table1(cfg, args):
    mu = args.mu if args.mu is not None else cfg["functional.mu"]
    cfg = cfg.copy()
    cfg["functional.kind"] = "quadratic"
    cfg["backend.kind"] = "sine"
    rows, ok = [], True
    for N, n in sorted(TABLE1_ROWS):
        row, _ = run_case(cfg, mu, N, n, _table_d(cfg), _workers(cfg, args))
        rows.append(row)
        good = table1_row_ok(N, n, row[3], row[4])
        ok &= good
        print(f"table1 N={N:4d} n={n:3d} err={row[3]:.3e} published={TABLE1_ROWS[(N, n)]:.3e} "
              f"K={row[4]} {'PASS' if good else 'FAIL'}", file=sys.stderr)
    write_csv(args.out or cfg["output.path"], CSV_HEADER, rows)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def cmd_converge(cfg, args):
    mu = args.mu if args.mu is not None else cfg["functional.mu"]
    rows = []
    for N in sorted(cfg["quadrature.N_list"]):
        for n in sorted(cfg["collocation.n_list"]):
            try:
                row, _ = run_case(cfg, mu, N, n, _table_d(cfg), _workers(cfg, args))
            except DivergenceError as exc:
                rep = exc.report
                row = [N, n, mu, math.nan, rep.iterations, math.nan, math.nan, rep.solves]
            rows.append(row)
    write_csv(args.out or cfg["output.path"], CSV_HEADER, rows)
    return EXIT_OK


def cmd_bench(cfg, args):
    base = None
    rows, ok = [], True
    for w in cfg["bench.workers_list"]:
        problem = build_problem(cfg)
        system = problem.build(workers=max_workers(w))
        t0 = time.perf_counter()
        p = system.p()
        gp = system.G(p)
        wall = (time.perf_counter() - t0) * 1e3
        result = np.concatenate([p, gp])
        if base is None:
            base = (result, wall)
        elif not np.array_equal(result.view(np.float64), base[0].view(np.float64)):
            ok = False
            print(f"bench: results for workers={w} differ from workers=1", file=sys.stderr)
        rows.append([w, wall, system.solve_count])
        speedup = base[1] / wall if wall > 0 else math.nan
        print(f"bench workers={w} wall_ms={wall:.1f} speedup={speedup:.2f}", file=sys.stderr)
    write_csv(args.out or cfg["output.path"], ["workers", "wall_ms", "solves"], rows)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


COMMANDS = {
    "expm": cmd_expm,
    "solve": cmd_solve,
    "table1": cmd_table1,
    "converge": cmd_converge,
    "bench": cmd_bench,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="nlcauchy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", help="output CSV path ('-' for stdout)")
        p.add_argument("--workers", type=int, help="resolvent-solve worker threads")
        p.add_argument("--mu", type=float, help="nonlocal coefficient mu")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg.override(args.set)
        if args.mu is not None:
            cfg["functional.mu"] = args.mu
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, OSError) as exc:
        print(f"nlcauchy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
