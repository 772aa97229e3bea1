"""Command-line front end.  Every command writes CSV with a one-line header."""

from __future__ import annotations

import argparse
import csv
import itertools
import math
import sys
import time

import numpy as np

from . import metrics, nn1d, oracle, placement, spectral
from .lattice import LatticeError, load_lattice_spec, nearest_neighbor_1d
from .quadrature import QuadratureConfig, default_config


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def parse_range(text: str) -> list[int]:
    """'0..5' or '1,4,7' (or a mix, '0..2,7') into integers."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def parse_node(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def parse_nodes(text: str, d: int) -> list[tuple[int, ...]]:
    """1-D: a range list like '0..3,7'.  d > 1: nodes separated by ';', e.g. '0,0;1,0'."""
    if d == 1:
        return [(v,) for v in parse_range(text)]
    return [parse_node(chunk) for chunk in text.split(";") if chunk.strip()]


def label(node) -> str:
    node = tuple(node)
    return str(node[0]) if len(node) == 1 else ";".join(map(str, node))


class _Output:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.fh = open(self.path, "w", newline="") if self.path else sys.stdout
        return csv.writer(self.fh, lineterminator="\n")

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()


def _lattice(args):
    """(spec, params-or-None); inline --p/--s means the 1-D nearest-neighbor lattice."""
    if args.spec:
        return load_lattice_spec(args.spec), None
    if args.p is None or args.s is None:
        raise LatticeError("give either --spec or both --p and --s")
    params = nn1d.NN1DParams(args.p, args.s)
    return params.to_spec(), params


def _quad(args, d: int) -> QuadratureConfig:
    if args.quad_points:
        return QuadratureConfig(args.quad_points)
    return default_config(d)


# -- commands ---------------------------------------------------------------------------


def cmd_entry(args) -> int:
    spec, params = _lattice(args)
    q = _quad(args, spec.d)
    drivers = parse_nodes(args.drivers, spec.d) if args.drivers else [(0,) * spec.d]
    if args.diag:
        pairs = [((k,), (k,)) for k in parse_range(args.diag)]
        if spec.d != 1:
            raise LatticeError("--diag is for 1-D lattices")
    else:
        if args.i is None or args.j is None:
            raise LatticeError("give --diag or both --i and --j")
        pairs = [(parse_node(args.i), parse_node(args.j))]
    method = args.method or ("quadrature" if params and args.tf is None else "spectral")
    if method in ("quadrature", "recursion") and (params is None or args.tf is not None or len(drivers) != 1):
        raise LatticeError(f"method {method!r} needs inline --p/--s, one driver and the steady state")
    a = drivers[0]
    rows = []
    if method == "recursion":
        shifts = [(i[0] - a[0], j[0] - a[0]) for i, j in pairs]
        if any(abs(i) != abs(j) for i, j in shifts):
            raise LatticeError("the recursion only gives diagonal entries")
        diag = nn1d.diagonal_recursion(params, max(1, max(abs(i) for i, _ in shifts)))
        rows = [(i, j, diag[abs(i)]) for i, j in shifts]
    elif method == "quadrature":
        for i, j in pairs:
            si, sj = i[0] - a[0], j[0] - a[0]
            rows.append((si, sj, nn1d.entry_quadrature(params, si, sj, QuadratureConfig(args.quad_points or 64))))
    elif method == "spectral":
        block = spectral.gramian_block(spec, drivers, [i for i, _ in pairs], [j for _, j in pairs], args.tf, q)
        rows = [(label(i), label(j), block[k, k]) for k, (i, j) in enumerate(pairs)]
    else:
        sysm = oracle.truncate(spec, args.radius, drivers)
        W = oracle.lyapunov_steady(sysm) if args.tf is None else oracle.gramian_ode(sysm, args.tf)
        rows = [(label(i), label(j), W[sysm.row(i), sysm.row(j)]) for i, j in pairs]
    with _Output(args.out) as out:
        out.writerow(["i_shift", "j_shift", "value", "method"])
        for i, j, v in rows:
            out.writerow([i, j, fmt(v), method])
    return 0


def cmd_fig2(args) -> int:
    alphas = [float(a) for a in args.alpha.split(",")]
    for a in alphas:
        if not a > 1:
            raise LatticeError(f"alpha must exceed 1, got {a}")
    indices = list(range(args.max_index + 1))
    with _Output(args.out) as out:
        out.writerow(["alpha", "index", "G_diag", "asymptote"])
        for a in alphas:
            params = nn1d.NN1DParams.from_alpha(a)
            diag = [nn1d.entry_quadrature(params, m, m) for m in indices]
            cal = min(args.calibrate_at, args.max_index)
            for m in indices:
                asym = diag[cal] * params.z_tilde ** (m - cal)
                out.writerow([fmt(a), m, fmt(diag[m]), fmt(asym)])
    return 0


def fig3_rows(params: nn1d.NN1DParams, nodes=range(8), sizes=(1, 2, 3)):
    """(metric, n_t, targets, ell, value, bound) for every target subset, driver at 0."""
    nodes = list(nodes)
    full = nn1d.output_gramian(params, nodes).matrix
    g00 = nn1d.diagonal_seeds(params)[0]
    out = []
    for metric in placement.METRICS:
        for n_t in sizes:
            for subset in itertools.combinations(range(len(nodes)), n_t):
                targets = [nodes[k] for k in subset]
                gram = metrics.OutputGramian(full[np.ix_(subset, subset)], tuple((t,) for t in targets))
                ell = max(abs(t) for t in targets)
                if metric == "trace_inverse":
                    value = metrics.trace_inverse(gram)
                    bound = metrics.bound_trace_inverse(ell, params).value
                else:
                    value = metrics.neg_log_det_scaled(gram, g00)
                    bound = metrics.bound_neg_log_det(ell, params, n_t).value
                out.append((metric, n_t, targets, ell, value, bound))
    return out


def cmd_fig3(args) -> int:
    params = nn1d.NN1DParams(args.p if args.p is not None else -3.0, args.s if args.s is not None else 1.0)
    rows = fig3_rows(params, range(args.max_node + 1))
    with _Output(args.out) as out:
        out.writerow(["metric", "n_t", "target_set", "ell", "value", "bound"])
        for metric, n_t, targets, ell, value, bound in rows:
            out.writerow([metric, n_t, ";".join(map(str, targets)), ell, fmt(value), fmt(bound)])
    return 0


def oracle_checks(params: nn1d.NN1DParams, q: QuadratureConfig, radius: int = 100, extra_spec=None, extra_radius: int = 8):
    """Cross-module agreement checks: (name, max_error, tolerance) triples."""
    spec = params.to_spec()
    nq = QuadratureConfig(q.points_per_dim, q.scheme)
    checks = []

    quad = [nn1d.entry_quadrature(params, k, k, nq) for k in range(11)]
    seeds = nn1d.diagonal_seeds(params)
    checks.append(("seeds_vs_quadrature", max(abs(s / g - 1) for s, g in zip(seeds, quad)), 1e-10))
    rec = nn1d.diagonal_recursion(params, 10)
    checks.append(("recursion_vs_quadrature", max(abs(r / g - 1) for r, g in zip(rec, quad)), 1e-6))

    sysm = oracle.truncate(spec, radius, [0])
    idx = list(range(-5, 6))
    rows = sysm.rows(idx)
    W = oracle.lyapunov_steady(sysm)[np.ix_(rows, rows)]
    ss = spectral.gramian_block(spec, [0], idx, idx, None, q)
    checks.append(("spectral_ss_vs_lyapunov", float(np.abs(ss - W).max()), 1e-6))
    folded = np.array([[nn1d.entry_quadrature(params, i, j, nq) for j in idx] for i in idx])
    checks.append(("quadrature_vs_lyapunov", float(np.abs(folded - W).max()), 1e-6))
    for t in (1.0, 5.0):
        Wt = oracle.gramian_ode(sysm, t)[np.ix_(rows, rows)]
        st = spectral.gramian_block(spec, [0], idx, idx, t, q)
        checks.append((f"spectral_t{t:g}_vs_rk4", float(np.abs(st - Wt).max()), 1e-6))
    late = spectral.gramian_block(spec, [0], idx, idx, 50.0, q)
    checks.append(("spectral_t50_vs_steady", float(np.abs(late - ss).max()), 1e-6))

    if extra_spec is not None:
        d = extra_spec.d
        origin = (0,) * d
        nodes = list(itertools.product(range(-2, 3), repeat=d))
        s2 = oracle.truncate(extra_spec, extra_radius, [origin])
        r2 = s2.rows(nodes)
        W2 = oracle.lyapunov_steady(s2)[np.ix_(r2, r2)]
        G2 = spectral.gramian_block(extra_spec, [origin], nodes, nodes, None, default_config(d) if q == default_config(1) else q)
        checks.append((f"spectral_ss_vs_lyapunov_d{d}", float(np.abs(G2 - W2).max()), 1e-4))
    return checks


def cmd_oracle_check(args) -> int:
    params = nn1d.NN1DParams(args.p if args.p is not None else -3.0, args.s if args.s is not None else 1.0)
    q = _quad(args, 1)
    extra = load_lattice_spec(args.spec) if args.spec else None
    try:
        checks = oracle_checks(params, q, args.radius or 100, extra, args.extra_radius)
    except (ArithmeticError, oracle.OracleError) as exc:
        print(f"oracle-check aborted: {exc}", file=sys.stderr)
        return 1
    failed = 0
    with _Output(args.out) as out:
        out.writerow(["check", "max_error", "tolerance", "pass"])
        for name, err, tol in checks:
            ok = bool(err <= tol)
            failed += not ok
            out.writerow([name, fmt(err), fmt(tol), "PASS" if ok else "FAIL"])
    return 1 if failed else 0


def cmd_placement(args) -> int:
    spec, params = _lattice(args)
    if not args.targets or not args.candidates:
        raise LatticeError("--targets and --candidates are required")
    targets = parse_nodes(args.targets, spec.d)
    candidates = parse_nodes(args.candidates, spec.d)
    if not targets or not candidates:
        raise LatticeError("empty target or candidate set")
    if params is not None:
        targets = [t[0] for t in targets]
        candidates = [c[0] for c in candidates]
    problem = placement.PlacementProblem(params or spec, tuple(targets), tuple(candidates), args.metric)
    report = placement.rank_candidates(problem, None if params else _quad(args, spec.d))
    with _Output(args.out) as out:
        out.writerow(["candidate", "value", "ell", "bound", "controllable"])
        for r in report.rows:
            out.writerow([label(np.atleast_1d(r.candidate)), fmt(r.value), r.ell, fmt(r.bound), r.controllable])
    summary = (
        f"exact_winner={label(np.atleast_1d(report.exact_winner))} "
        f"heuristic_winner={label(np.atleast_1d(report.heuristic_winner))} "
        f"spearman={fmt(report.spearman)}"
    )
    print(summary, file=sys.stdout if args.out else sys.stderr)
    return 0


def cmd_metrics(args) -> int:
    spec, params = _lattice(args)
    if not args.targets:
        raise LatticeError("--targets is required")
    targets = parse_nodes(args.targets, spec.d)
    driver = parse_node(args.drivers) if args.drivers else (0,) * spec.d
    if params is not None and args.tf is None:
        gram = nn1d.output_gramian(params, [t[0] for t in targets], driver[0])
        g00 = nn1d.diagonal_seeds(params)[0]
    else:
        q = _quad(args, spec.d)
        gram = spectral.output_gramian(spec, [driver], targets, args.tf, q)
        g00 = spectral.gramian_entry_t(spec, [driver], driver, driver, args.tf, q) if args.tf else spectral.gramian_entry_ss(spec, [driver], driver, driver, q)
    b = [float(v) for v in args.b.split(",")] if args.b else None
    report = metrics.energy_report(gram, g00, b)
    with _Output(args.out) as out:
        out.writerow(["quantity", "value"])
        for key, val in vars(report).items():
            if key == "interlacing_lower_bounds":
                for t, v in zip(gram.targets, val):
                    out.writerow([f"inv_diag[{label(t)}]", fmt(v)])
            elif val is not None:
                out.writerow([key, fmt(val)])
    return 0


COMMANDS = {
    "entry": cmd_entry,
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "oracle-check": cmd_oracle_check,
    "placement": cmd_placement,
    "metrics": cmd_metrics,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, help="self-loop weight of the 1-D nearest-neighbor lattice")
    common.add_argument("--s", type=float, help="coupling weight of the 1-D nearest-neighbor lattice")
    common.add_argument("--spec", help="lattice JSON file (fields d, offsets, weights)")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--quad-points", type=int, help="quadrature points per dimension")
    common.add_argument("--radius", type=int, default=100, help="oracle window radius")

    parser = argparse.ArgumentParser(prog="latticegram", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entry", parents=[common], help="Gramian entries")
    p.add_argument("--diag", help="diagonal indices, e.g. 0..5")
    p.add_argument("--i", help="row node, e.g. 0 or 0,0")
    p.add_argument("--j", help="column node")
    p.add_argument("--steady", action="store_true", help="steady state (default unless --tf)")
    p.add_argument("--tf", type=float, help="time for the time-varying Gramian")
    p.add_argument("--drivers", help="driver nodes (default: the origin)")
    p.add_argument("--method", choices=["quadrature", "recursion", "spectral", "oracle"])

    p = sub.add_parser("fig2", parents=[common], help="diagonal decay series")
    p.add_argument("--alpha", default="1.5,3.5")
    p.add_argument("--max-index", type=int, default=20)
    p.add_argument("--calibrate-at", type=int, default=10)

    p = sub.add_parser("fig3", parents=[common], help="metric bounds over target subsets")
    p.add_argument("--max-node", type=int, default=7)

    p = sub.add_parser("oracle-check", parents=[common], help="spectral/closed-form vs finite-lattice checks")
    p.add_argument("--extra-radius", type=int, default=8, help="oracle radius for --spec")

    p = sub.add_parser("placement", parents=[common], help="rank single-driver candidates")
    p.add_argument("--targets")
    p.add_argument("--candidates")
    p.add_argument("--metric", choices=placement.METRICS, default="trace_inverse")

    p = sub.add_parser("metrics", parents=[common], help="energy metrics of one output Gramian")
    p.add_argument("--targets")
    p.add_argument("--drivers", help="single driver node (default: the origin)")
    p.add_argument("--tf", type=float)
    p.add_argument("--b", help="comma-separated target displacement for J*")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (LatticeError, ValueError, ArithmeticError, metrics.OutputUncontrollableError, oracle.OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
