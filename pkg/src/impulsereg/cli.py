"""Command line driver.

Subcommands: ``apply``, ``noise``, ``solve``, ``rates``, ``interp-check``,
``vsc-check``.  Exit codes: 0 success, 1 invariant or inequality violation,
2 input error, 3 solver non-convergence in single-cell mode.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analytic, harness, noise as noise_mod, operators, solver
from .errors import ConvergenceError, InputError
from .spectral import Manifold, SpectralFunction

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3


def _load_cfg(args) -> harness.ExperimentConfig:
    if args.config:
        cfg = harness.load_config(args.config)
    else:
        cfg = harness.ExperimentConfig()
    if getattr(args, "problem", None):
        cfg.problem = args.problem
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
        cfg.seeds = [args.seed]
    return cfg


def _out_stream(args):
    return open(args.out, "w", encoding="utf-8") if args.out else sys.stdout


def cmd_apply(args) -> int:
    cfg = _load_cfg(args)
    op = harness._build_operator(cfg)
    with open(args.coeff_file, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("manifold") != op.manifold.value:
        raise InputError(
            f"coefficient file is on {payload.get('manifold')!r}, operator on {op.manifold.value!r}"
        )
    f = SpectralFunction(op.grid, np.asarray(payload["coeffs"], dtype=float))
    result = operators.apply(op, f)
    out = {"manifold": op.manifold.value, "coeffs": result.coeffs.tolist()}
    stream = _out_stream(args)
    json.dump(out, stream)
    stream.write("\n")
    if stream is not sys.stdout:
        stream.close()
    return EXIT_OK


def cmd_noise(args) -> int:
    cfg = _load_cfg(args)
    op = harness._build_operator(cfg)
    eta = cfg.eta if cfg.eta is not None else (cfg.eta_grid[0] if cfg.eta_grid else 0.1)
    eps = cfg.eps if cfg.eps is not None else (cfg.eps_grid[0] if cfg.eps_grid else 0.0)
    inst = noise_mod.make_impulsive(
        op.grid, eta, eps, cfg.amplitude_factor, cfg.seed, contiguous=not cfg.scattered
    )
    out = {
        "eta_requested": eta,
        "eps_requested": eps,
        "eta_measured": inst.eta_measured,
        "epsilon_measured": inst.epsilon_measured,
        "seed": cfg.seed,
        "xi": inst.xi.tolist(),
        "mask": inst.corrupt_mask.astype(int).tolist(),
    }
    stream = _out_stream(args)
    json.dump(out, stream)
    stream.write("\n")
    if stream is not sys.stdout:
        stream.close()
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _load_cfg(args)
    op = harness._build_operator(cfg)
    profile = analytic.interp_profile(op.manifold, op.weight).scaled(op.norm_bound)
    source = operators.make_source(op, cfg.p, cfg.seed)
    gdag = operators.apply(op, source.udag)
    eta = cfg.eta if cfg.eta is not None else 0.0
    eps = cfg.eps if cfg.eps is not None else 0.0
    inst = noise_mod.make_impulsive(
        op.grid, eta, eps, cfg.amplitude_factor * gdag.sup_norm(), cfg.seed,
        contiguous=not cfg.scattered,
    )
    alpha = harness._choose_alpha(cfg, inst.epsilon_measured, inst.eta_measured, profile)
    prob = solver.TikhonovProblem(op, gdag.values + inst.xi, alpha, r=1)
    res = solver.solve_l1(prob, tol=cfg.tol, max_iter=cfg.max_iter)
    err = solver.bregman(res.f_hat, source.udag)
    print(
        f"eps={inst.epsilon_measured:.6g} eta={inst.eta_measured:.6g} alpha={alpha:.6g} "
        f"bregman_error={err:.6g} residual_l1={res.residual_l1:.6g} "
        f"iterations={res.iterations} converged={str(res.converged).lower()}"
    )
    if args.out:
        row = harness.RateRow(
            eps=eps, eta=eta, alpha=alpha, bregman_error=err,
            residual_l1=res.residual_l1, iterations=res.iterations,
            converged=res.converged, seed=cfg.seed,
        )
        harness.emit_csv([row], args.out)
    if not res.converged:
        raise ConvergenceError("primal-dual gap above tolerance")
    return EXIT_OK


def cmd_rates(args) -> int:
    cfg = _load_cfg(args)
    report = harness.run_rate_study(cfg)
    if args.out:
        harness.emit_csv(report.rows, args.out)
    if report.eta_fit is not None:
        print(
            f"eta sweep: slope={report.eta_fit.slope:.4f} "
            f"target={report.eta_exponent_target:.1f} R2={report.eta_fit.r_squared:.4f}"
        )
    if report.eps_fit is not None:
        print(f"eps sweep: R2={report.eps_fit.r_squared:.4f}")
    if report.l1_l2_cells:
        print(f"l1 beats l2 in {report.l1_l2_wins}/{report.l1_l2_cells} cells")
    if report.skipped_eta:
        print(f"eta values beyond the bound range (not checked): {report.skipped_eta}")
    n_viol = len(report.energy_violations) + len(report.rate_violations)
    if n_viol:
        print(f"VIOLATIONS: energy={report.energy_violations} rate={report.rate_violations}")
        return EXIT_VIOLATION
    print("all inequality checks passed")
    return EXIT_OK


def cmd_interp_check(args) -> int:
    cfg = _load_cfg(args)
    weight = harness.study_weight(cfg)
    manifold = Manifold(cfg.manifold) if cfg.manifold else (
        Manifold.CIRCLE if cfg.problem == "heat" else Manifold.SPHERE
    )
    profile = analytic.interp_profile(manifold, weight)
    deltas = harness.default_delta_grid(profile, cfg.n_delta)
    report = harness.run_interp_study(
        manifold, weight, cfg.samples, deltas, cfg.seed,
        grid=harness.study_grid(manifold, cfg),
    )
    print(
        f"{manifold.value}: {report.n_samples} samples x {report.n_deltas} deltas, "
        f"max lhs/rhs = {report.max_tightness:.4f}"
    )
    if report.violations:
        print(f"VIOLATIONS at (sample, delta): {report.violations}")
        return EXIT_VIOLATION
    print("interpolation inequality certified")
    return EXIT_OK


def cmd_vsc_check(args) -> int:
    cfg = _load_cfg(args)
    op = harness._build_operator(cfg)
    source = operators.make_source(op, cfg.p, cfg.seed)
    phi = solver.fit_phi_scale(
        op, source.udag, 2.0 * source.smoothing_index, cfg.beta, cfg.vsc_samples, cfg.seed
    )
    report = solver.vsc_check(
        op, source.udag, phi, cfg.beta, cfg.vsc_samples, cfg.seed + 1
    )
    print(
        f"fitted scale={phi.scale:.6g} fresh samples={report.samples} "
        f"violations={report.violations} worst margin={report.margin:.6g}"
    )
    return EXIT_OK if report.violations == 0 else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="impulsereg",
        description="L1-fidelity Tikhonov regularization studies under impulsive noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a key = value configuration file")
        p.add_argument("--out", help="output file path")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument(
            "--problem", choices=["heat", "gradiometry"], default=None,
            help="forward problem override",
        )

    p_apply = sub.add_parser("apply", help="apply the forward operator to a coefficient file")
    p_apply.add_argument("coeff_file", help="JSON file with 'manifold' and 'coeffs'")
    common(p_apply)
    p_apply.set_defaults(func=cmd_apply)

    p_noise = sub.add_parser("noise", help="emit one impulsive noise instance")
    common(p_noise)
    p_noise.set_defaults(func=cmd_noise)

    p_solve = sub.add_parser("solve", help="solve a single (eps, eta) cell")
    common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_rates = sub.add_parser("rates", help="run the full rate study and emit CSV")
    common(p_rates)
    p_rates.set_defaults(func=cmd_rates)

    p_interp = sub.add_parser("interp-check", help="certify the interpolation inequality")
    common(p_interp)
    p_interp.set_defaults(func=cmd_interp_check)

    p_vsc = sub.add_parser("vsc-check", help="fit and re-test the smoothness inequality")
    common(p_vsc)
    p_vsc.set_defaults(func=cmd_vsc_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
