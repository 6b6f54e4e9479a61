"""Command-line entry points.

Subcommands: spectrum, complexity, rates, fit, experiment, gapcheck, certify.
Exit codes: 0 success, 2 invalid argument, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import svg
from .complexity import empirical_mendelson, solve_mendelson
from .entropy_rates import certify_lower_bound, covering_radius, rate_curve, rate_table
from .errors import NumericError
from .harness import ExperimentConfig, eigen_gap_check, kernel_by_name, run_experiment
from .kernels import gram
from .regression import diagnostics, eigendecompose, excess_risk, fit_flow
from .spectrum import build_spectrum
from .sphere_data import generate_dataset, make_target, sample_sphere

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def _load_taylor(path: str | None):
    if path is None:
        return None
    coeffs = json.loads(Path(path).read_text())
    if not isinstance(coeffs, list):
        raise ValueError("taylor coefficient file must hold a JSON array")
    return coeffs


def _add_kernel_args(parser):
    parser.add_argument("--kernel", choices=["ntk2", "rbf", "taylor"], default="ntk2")
    parser.add_argument("--taylor-coeffs", help="path to a JSON array of coefficients", default=None)


def _out_path(args, default_name: str) -> Path:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / default_name


def cmd_spectrum(args) -> int:
    profile = kernel_by_name(args.kernel, _load_taylor(args.taylor_coeffs))
    spec = build_spectrum(profile, args.d, args.tail_tol)
    lines = ["k,mu_k,log_mu_k,N,log_N"]
    for lv in spec.levels:
        log_mu = repr(math.log(lv.mu)) if lv.mu > 0 else "-inf"
        lines.append(f"{lv.k},{repr(lv.mu)},{log_mu},{lv.multiplicity},{repr(lv.log_multiplicity)}")
    text = "\n".join(lines) + "\n"
    path = _out_path(args, f"spectrum_{profile.label}_d{args.d}.csv")
    path.write_text(text)
    print(f"wrote {path} ({len(spec.levels)} levels, tail_mass={spec.tail_mass:.3e}, "
          f"unresolved={spec.truncation_tail:.3e})")
    return EXIT_OK


def cmd_complexity(args) -> int:
    profile = kernel_by_name(args.kernel, _load_taylor(args.taylor_coeffs))
    if args.empirical:
        sample = sample_sphere(args.d, args.n, args.seed)
        ge = eigendecompose(gram(profile, sample, normalized=True))
        sol = empirical_mendelson(ge, args.sigma)
    else:
        spec = build_spectrum(profile, args.d)
        sol = solve_mendelson(spec, args.n, args.sigma)
    out = {
        "epsilon": sol.epsilon,
        "epsilon_sq": sol.epsilon_sq,
        "stopping_time": sol.stopping_time,
        "residual": sol.residual,
        "kind": sol.kind,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_rates(args) -> int:
    gammas = []
    g = args.gamma_min
    while g <= args.gamma_max + 1e-12:
        gammas.append(round(g, 10))
        g += args.step
    errors: list = []
    points = rate_table(gammas, [args.family], errors=errors)
    lines = ["gamma,p,n_exponent,d_exponent,log_factor,match_status"]
    for pt in points:
        lines.append(f"{repr(pt.gamma)},{pt.p},{repr(pt.n_exponent)},{repr(pt.d_exponent)},"
                     f"{str(pt.log_factor).lower()},{pt.match_status}")
    path = _out_path(args, f"rates_{args.family}.csv")
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(points)} points, {len(errors)} skipped)")
    if args.format == "svg":
        xs = [pt.gamma for pt in points]
        chart_n = svg.line_chart(
            {"n-exponent": (xs, [pt.n_exponent for pt in points])},
            x_label="gamma", y_label="excess-risk exponent in n",
            title=f"{args.family}: rate exponent vs scaling",
        )
        chart_d = svg.line_chart(
            {"d-exponent": (xs, [pt.d_exponent for pt in points])},
            x_label="gamma", y_label="excess-risk exponent in d",
            title=f"{args.family}: d-scale exponent vs scaling",
        )
        p1 = _out_path(args, f"rates_{args.family}_n_scale.svg")
        p2 = _out_path(args, f"rates_{args.family}_d_scale.svg")
        p1.write_text(chart_n)
        p2.write_text(chart_d)
        print(f"wrote {p1} and {p2}")
    return EXIT_OK


def cmd_fit(args) -> int:
    profile = kernel_by_name(args.kernel, _load_taylor(args.taylor_coeffs))
    target = make_target(profile, args.d, args.n_anchors, seed=args.seed + 1)
    train = sample_sphere(args.d, args.n, seed=args.seed)
    data = generate_dataset(target, train, args.sigma, seed=args.seed + 2)
    ge = eigendecompose(gram(profile, train, normalized=True))
    if args.t == "auto":
        t = empirical_mendelson(ge, max(args.sigma, 1e-12)).stopping_time
    elif args.t == "inf":
        t = math.inf
    else:
        t = float(args.t)
    predictor = fit_flow(ge, data.responses, t, train=train, profile=profile)
    test = sample_sphere(args.d, args.test_size, seed=args.seed + 3)
    risk = excess_risk(predictor, target, test)
    diag = diagnostics(ge, data.responses, target(train.points), t)
    resid = float(np.mean((predictor.train_predictions() - data.responses) ** 2))
    print(json.dumps({
        "t_used": t,
        "train_residual": resid,
        "excess_risk": risk,
        "bias_sq": diag.bias_sq,
        "variance": diag.variance,
    }, indent=2))
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.config:
        config = ExperimentConfig.from_json(Path(args.config).read_text())
    else:
        n_grid = tuple(int(v) for v in args.n_grid.split(","))
        config = ExperimentConfig(
            gamma=args.gamma,
            n_grid=n_grid,
            kernel=args.kernel,
            trials=args.trials,
            master_seed=args.seed,
            stopping_mode=args.stopping_mode,
            d_rule=args.d_rule,
            taylor_coeffs=tuple(_load_taylor(args.taylor_coeffs)) if args.taylor_coeffs else None,
        )
    table = run_experiment(config)
    csv_path = _out_path(args, f"experiment_gamma{config.gamma}.csv")
    csv_path.write_text(table.to_csv())
    summary = table.summary()
    json_path = _out_path(args, f"experiment_gamma{config.gamma}.json")
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True))
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.format == "svg":
        best_c = table.best_c_regression
        ns = list(config.n_grid)
        reg = []
        interp = []
        for n in ns:
            reg.append(float(np.mean([r.risk_regression for r in table.rows
                                      if r.n == n and r.C == best_c and not r.error])))
            interp.append(float(np.mean([r.risk_interpolation for r in table.rows
                                         if r.n == n and r.C == best_c and not r.error])))
        r_theory = rate_curve(config.gamma, "inner").n_exponent
        anchor = reg[0] * (ns[0] ** r_theory)
        ref = [anchor * n ** (-r_theory) for n in ns]
        chart = svg.line_chart(
            {"regression": (ns, reg), "interpolation": (ns, interp)},
            x_label="n", y_label="excess risk", log_x=True, log_y=True,
            reference=(f"theory n^-{r_theory:.3g}", ns, ref),
            title=f"gamma={config.gamma}, kernel={config.kernel}, best C={best_c}",
        )
        svg_path = _out_path(args, f"experiment_gamma{config.gamma}.svg")
        svg_path.write_text(chart)
        print(f"wrote {svg_path}")
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_gapcheck(args) -> int:
    profile = kernel_by_name(args.kernel, _load_taylor(args.taylor_coeffs))
    seeds = [args.seed + i for i in range(args.n_seeds)]
    result = eigen_gap_check(profile, args.gamma, args.d, args.p, seeds)
    print(json.dumps({
        "pass_fraction": result.pass_fraction,
        "n": result.n,
        "analytic_gap_ok": result.analytic_gap_ok,
        "mu_p": result.mu_p,
        "mu_p_plus_1": result.mu_p1,
        "cutoff_index": result.cutoff_index,
    }, indent=2))
    return EXIT_OK


def cmd_certify(args) -> int:
    profile = kernel_by_name(args.kernel, _load_taylor(args.taylor_coeffs))
    spec = build_spectrum(profile, args.d)
    cert = certify_lower_bound(spec, args.n, args.sigma, args.c2)
    print(json.dumps({
        "holds": cert.holds,
        "lhs": cert.lhs,
        "rhs": cert.rhs,
        "eps_bar": cert.eps_bar,
        "eps_bar_sq": cert.eps_bar**2,
        "risk_lower_bound": cert.risk_lower_bound,
        "c2": cert.c2,
    }, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sphereflow")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default=".")
    parser.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="emit the Mercer spectrum as CSV")
    _add_kernel_args(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--tail-tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("complexity", help="solve the Mendelson fixed point")
    _add_kernel_args(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--empirical", action="store_true")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("rates", help="theoretical rate curves over a gamma grid")
    p.add_argument("--family", choices=["inner", "ntk", "interpolation"], default="inner")
    p.add_argument("--gamma-min", type=float, required=True)
    p.add_argument("--gamma-max", type=float, required=True)
    p.add_argument("--step", type=float, default=0.01)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("fit", help="fit the flow regressor on one synthetic dataset")
    _add_kernel_args(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", default="auto", help="flow time: value, auto, or inf")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n-anchors", type=int, default=3)
    p.add_argument("--test-size", type=int, default=1000)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("experiment", help="run a full rate-fitting experiment")
    _add_kernel_args(p)
    p.add_argument("--config", help="JSON file with the ExperimentConfig schema")
    p.add_argument("--gamma", type=float, default=1.5)
    p.add_argument("--n-grid", default="400,700,1000,1400,1600")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--stopping-mode", choices=["fixed_exponent", "theory"], default="fixed_exponent")
    p.add_argument("--d-rule", choices=["round", "ceil"], default="round")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("gapcheck", help="empirical eigen-gap block structure check")
    _add_kernel_args(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n-seeds", type=int, default=20)
    p.set_defaults(func=cmd_gapcheck)

    p = sub.add_parser("certify", help="evaluate the minimax lower-bound certificate")
    _add_kernel_args(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=0.2)
    p.set_defaults(func=cmd_certify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
