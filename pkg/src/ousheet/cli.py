"""Command-line interface: ``ousheet <command> [options]``.

Exit codes: 0 success, 2 input error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from . import __version__
from .design import SearchConfig, geometric_surface, optimal_trend_design, search
from .errors import NonConvergenceWarning, NoImprovementWarning, OUSheetError
from .fisher import evaluate
from .io import RunManifest, load_design, save_design, write_csv
from .model import CovarianceParams, GridDesign, MonotoneDesign, Region
from .oracle import as_points, grid_trend_information, trend_information_oracle
from .reproduce import reference_table
from .simulate import GENERATOR, SimulationConfig, empirical_fisher_check, gls_trend_estimate, simulate
from .verify import run_suites

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VERIFY = 3

SEED_ENV = "OU_DESIGN_SEED"
# larger than every suite threshold, including the mixed gradient tolerance
SELF_TEST_PERTURBATION = 1e-4


class InputError(Exception):
    pass


def _params(args) -> CovarianceParams:
    return CovarianceParams(args.alpha, args.beta, args.sigma)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _region(values) -> Region:
    a1, b1, a2, b2 = values
    return Region(a1, b1, a2, b2)


def _manifest(args, command, **parameters) -> RunManifest:
    params = {k: getattr(args, k) for k in ("alpha", "beta", "sigma") if hasattr(args, k)}
    params.update(parameters)
    return RunManifest(command, params)


def _emit(args, columns, rows, manifest):
    out = getattr(args, "out", None)
    if args.format == "pretty" and out is None:
        _pretty(columns, rows, sys.stdout)
        return
    write_csv(rows, columns, out if out is not None else sys.stdout, manifest)


def _pretty(columns, rows, stream):
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return f"{v:.10g}"
        return str(v)

    cells = [[fmt(v) for v in row] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    stream.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
    for r in cells:
        stream.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


REPORT_COLUMNS = ["n", "lambda", "m_theta", "m_alpha", "m_beta", "m_alpha_beta", "phi", "psi"]


def _report_row(report):
    d = report.as_dict()
    return [d.get(c) if d.get(c) is not None else "" for c in REPORT_COLUMNS]


def cmd_info(args) -> int:
    design = load_design(args.design, args.allow_nonpositive_origin)
    p = _params(args)
    manifest = _manifest(args, "info")
    manifest.add_input(args.design)
    if isinstance(design, MonotoneDesign):
        rows = [_report_row(evaluate(design, p))]
    else:
        if isinstance(design, GridDesign):
            m_theta = grid_trend_information(design, p)
        else:
            m_theta = trend_information_oracle(design, p)
        print(
            f"notice: {type(design).__name__} is not monotone; only M_theta is reported (oracle-only)",
            file=sys.stderr,
        )
        rows = [[design.n, "", m_theta, "", "", "", "", ""]]
    _emit(args, REPORT_COLUMNS, rows, manifest)
    return EXIT_OK


def cmd_optimal_trend(args) -> int:
    p = _params(args)
    region = _region(args.region)
    design = optimal_trend_design(args.n, region, p, margin=args.strict_interior)
    if args.out_design:
        save_design(design, args.out_design)
    manifest = _manifest(args, "optimal-trend", n=args.n, region=list(args.region), margin=args.strict_interior)
    _emit(args, REPORT_COLUMNS, [_report_row(evaluate(design, p))], manifest)
    return EXIT_OK


def cmd_surface(args) -> int:
    p = _params(args)
    table = geometric_surface(args.n, p, args.resolution)
    manifest = _manifest(args, "surface", n=args.n, resolution=args.resolution)
    _emit(args, ["r1", "r2", "m_theta", "phi", "psi"], table.tolist(), manifest)
    return EXIT_OK


def cmd_search(args) -> int:
    p = _params(args)
    seed = _seed(args)
    cfg = SearchConfig(
        objective=args.objective,
        n=args.n,
        region=_region(args.region),
        starts=args.starts,
        max_iter=args.max_iter,
        tol=args.tol,
        seed=seed,
        floor=args.floor,
        margin=args.strict_interior,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NoImprovementWarning)
        result = search(cfg, p)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.out_design:
        save_design(result.best_design, args.out_design)
    manifest = _manifest(args, "search", objective=args.objective, n=args.n, region=list(args.region), floor=args.floor)
    manifest.seeds.append(seed)
    columns = ["kind", "start", "initial_value", "value", "gradient_norm", "boundary", "family_distance"]
    rows = []
    for r in result.runs:
        flags = ";".join(b or "-" for b in r.boundary)
        rows.append(["run", r.start, r.initial_value, r.value, r.gradient_norm, flags, ""])
    for c in result.critical_points:
        rows.append(["critical", c.start, "", c.value, c.gradient_norm, "interior", c.family_distance])
    _emit(args, columns, rows, manifest)
    return EXIT_OK


def _sim_manifest(args, command, seed):
    m = _manifest(args, command, theta=args.theta, replications=args.replications, generator=GENERATOR)
    m.seeds.append(seed)
    m.add_input(args.design)
    return m


def cmd_simulate(args) -> int:
    design = load_design(args.design, args.allow_nonpositive_origin)
    p = _params(args)
    seed = _seed(args)
    pts = as_points(design)
    y = simulate(pts, p, args.theta, seed, args.replications)
    theta_hat, _ = gls_trend_estimate(y, pts, p) if args.replications else (np.empty(0), None)
    columns = ["replication", "theta_hat"] + [f"y{i + 1}" for i in range(pts.shape[0])]
    rows = [[i, float(theta_hat[i])] + y[i].tolist() for i in range(args.replications)]
    _emit(args, columns, rows, _sim_manifest(args, "simulate", seed))
    return EXIT_OK


def cmd_fisher_check(args) -> int:
    design = load_design(args.design, args.allow_nonpositive_origin)
    if not isinstance(design, MonotoneDesign):
        raise InputError("fisher-check needs a monotone design")
    seed = _seed(args)
    cfg = SimulationConfig(seed, args.replications, args.theta, _params(args))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        rep = empirical_fisher_check(design, cfg, fit=args.fit)
    rows = [["theta_variance", rep["theta_var_predicted"], rep["theta_var_empirical"], rep["theta_var_se"]]]
    if "empirical_cov_alpha_beta" in rep:
        pred, emp = rep["predicted_cov_alpha_beta"], rep["empirical_cov_alpha_beta"]
        for name, (i, j) in (("cov_alpha_alpha", (0, 0)), ("cov_beta_beta", (1, 1)), ("cov_alpha_beta", (0, 1))):
            rows.append([name, float(pred[i, j]), float(emp[i, j]), ""])
    if rep.get("identifiable") is False:
        print("warning: Phi = 0 for this design; the (alpha, beta) covariance has no finite prediction", file=sys.stderr)
    if "failed_fits" in rep:
        rows.append(["failed_fits", "", rep["failed_fits"], ""])
    _emit(args, ["quantity", "predicted", "empirical", "se"], rows, _sim_manifest(args, "fisher-check", seed))
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = _seed(args)
    perturb = SELF_TEST_PERTURBATION if args.self_test else 0.0
    results = run_suites(args.trials, args.n_max, seed, perturb) if args.trials > 0 else []
    manifest = RunManifest("verify", {"trials": args.trials, "n_max": args.n_max, "self_test": args.self_test})
    manifest.seeds.append(seed)
    rows = [[r.name, r.trials, r.max_error, r.threshold, "pass" if r.passed else "FAIL"] for r in results]
    _emit(args, ["suite", "trials", "max_error", "threshold", "status"], rows, manifest)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_tables(args) -> int:
    rows = []
    for r in reference_table():
        rows.append([r.id, r.group, r.label, r.published, r.computed, r.extra, r.difference, r.tolerance, r.status, r.note])
    columns = ["id", "group", "label", "published", "computed", "extra", "difference", "tolerance", "status", "note"]
    rows = [[("" if v is None else v) for v in row] for row in rows]
    _emit(args, columns, rows, RunManifest("tables"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ousheet", description="Exact designs for OU sheets on monotone sets.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=1.0, help="rate on t-distances")
    common.add_argument("--beta", type=float, default=1.0, help="rate on s-distances")
    common.add_argument("--sigma", type=float, default=1.0)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "pretty"), default="csv")
    common.add_argument("--seed", type=int, default=None, help=f"random seed (fallback: ${SEED_ENV}, then 0)")

    design_opts = argparse.ArgumentParser(add_help=False)
    design_opts.add_argument("--design", required=True, help="design file (JSON)")
    design_opts.add_argument("--allow-nonpositive-origin", action="store_true")

    region_opts = argparse.ArgumentParser(add_help=False)
    region_opts.add_argument(
        "--region", type=float, nargs=4, metavar=("A1", "B1", "A2", "B2"), required=True,
        help="s-axis [A1, B1] and t-axis [A2, B2]",
    )
    region_opts.add_argument("--strict-interior", type=float, default=0.0, metavar="MARGIN",
                             help="shrink both spans by this fraction")
    region_opts.add_argument("--out-design", help="write the resulting design file here")

    p = sub.add_parser("info", parents=[common, design_opts], help="evaluate a design")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("optimal-trend", parents=[common, region_opts], help="equidistant trend-optimal design")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_optimal_trend)

    p = sub.add_parser("surface", parents=[common], help="geometric-progression information surface")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--resolution", type=int, default=50)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("search", parents=[common, region_opts], help="multistart numerical design search")
    p.add_argument("--objective", choices=("trend", "phi", "psi"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--starts", type=int, default=20)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--floor", type=float, default=1e-3, help="smallest skewed increment")
    p.set_defaults(func=cmd_search)

    for name, func, helptext in (
        ("simulate", cmd_simulate, "simulate observations and GLS estimates"),
        ("fisher-check", cmd_fisher_check, "Monte-Carlo check of information predictions"),
    ):
        p = sub.add_parser(name, parents=[common, design_opts], help=helptext)
        p.add_argument("--theta", type=float, default=0.0)
        p.add_argument("--replications", type=int, default=1000)
        if name == "fisher-check":
            p.add_argument("--fit", action="store_true", help="also run ML fits of (alpha, beta)")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", parents=[common], help="run closed-form vs oracle suites")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--self-test", action="store_true", help="scale the closed forms by 1 + 1e-4; every suite must fail")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tables", parents=[common], help="published example numbers vs recomputed values")
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OUSheetError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
