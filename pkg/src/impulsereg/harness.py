"""Experiment driver: rate sweeps, interpolation certification, CSV emission.

A rate study rebuilds the full chain for every (eps, eta) cell and seed:
source element, exact data, noise instance, a-priori alpha, L1 solve,
error bookkeeping.  Energy and rate inequalities are evaluated on every
applicable cell and slope fits summarize the sweeps.  All randomness is
seeded per cell, so identical configurations give byte-identical CSV output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic, noise as noise_mod, operators, solver
from .analytic import interp_profile, sample_unit_ball
from .errors import ConfigError, InputError
from .spectral import Grid, Manifold, circle_grid, interval_grid, sphere_grid

_B = 2.0


@dataclass
class ExperimentConfig:
    problem: str = "heat"
    t_bar: float = 1.0
    radius: float = 2.0
    p: float = 1.0
    bandwidth: int = 128
    max_degree: int = 24
    eps_grid: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    eta_grid: list = field(default_factory=lambda: [0.4, 0.3, 0.225, 0.17, 0.13])
    alpha_rule: str = "paper"
    alpha_grid: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    tol: float = 1e-8
    max_iter: int = 50_000
    amplitude_factor: float = 10.0
    beta: float = 0.5
    vsc_samples: int = 200
    eps: float | None = None
    eta: float | None = None
    seed: int = 0
    samples: int = 100
    n_delta: int = 20
    weight: str = ""
    manifold: str = ""
    b_width: float = 0.5
    scattered: bool = False

    def __post_init__(self):
        if self.problem not in ("heat", "gradiometry"):
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.alpha_rule not in ("paper", "fixedgrid"):
            raise ConfigError(f"unknown alpha_rule {self.alpha_rule!r}")
        for grid_name in ("eps_grid", "eta_grid"):
            vals = getattr(self, grid_name)
            if any(v < 0 for v in vals):
                raise ConfigError(f"{grid_name} entries must be nonnegative")
            if sorted(vals) != vals and sorted(vals, reverse=True) != vals:
                raise ConfigError(f"{grid_name} must be sorted")


_LIST_KEYS = {"eps_grid", "eta_grid", "alpha_grid", "seeds"}
_INT_KEYS = {"bandwidth", "max_degree", "max_iter", "vsc_samples", "seed", "samples", "n_delta"}
_FLOAT_KEYS = {"t_bar", "radius", "p", "tol", "amplitude_factor", "beta", "eps", "eta", "b_width"}
_STR_KEYS = {"problem", "alpha_rule", "weight", "manifold"}
_BOOL_KEYS = {"scattered"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the line-based ``key = value`` configuration format.

    Blank lines and lines starting with '#' are ignored; unknown keys are
    rejected.  List values are comma separated.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        try:
            if key in _LIST_KEYS:
                items = [v for v in (s.strip() for s in val.split(",")) if v]
                values[key] = (
                    [int(v) for v in items] if key == "seeds" else [float(v) for v in items]
                )
            elif key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key in _STR_KEYS:
                values[key] = val
            elif key in _BOOL_KEYS:
                values[key] = val.lower() in ("1", "true", "yes")
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return ExperimentConfig(**values)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# rate study


@dataclass
class RateRow:
    eps: float
    eta: float
    alpha: float
    bregman_error: float
    residual_l1: float
    iterations: int
    converged: bool
    seed: int


@dataclass
class SweepFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


@dataclass
class RateStudyReport:
    rows: list
    eta_fit: SweepFit | None
    eps_fit: SweepFit | None
    eta_exponent_target: float
    l1_l2_wins: int
    l1_l2_cells: int
    energy_violations: list
    rate_violations: list
    skipped_eta: list
    non_converged: int


def _build_operator(cfg: ExperimentConfig) -> operators.DiagonalOperator:
    if cfg.problem == "heat":
        return operators.heat_operator(cfg.t_bar, cfg.bandwidth)
    return operators.gradiometry_operator(cfg.radius, cfg.max_degree)


def _cell_seed(seed: int, idx: int) -> int:
    return seed * 1_000_003 + 7919 * idx


def _choose_alpha(cfg, eps, eta, profile):
    if cfg.alpha_rule == "fixedgrid":
        if not cfg.alpha_grid:
            raise ConfigError("alpha_rule = fixedgrid requires alpha_grid")
        return cfg.alpha_grid[0] if len(cfg.alpha_grid) == 1 else None
    if cfg.problem == "heat":
        return solver.choose_alpha_heat(eps, eta, cfg.p, cfg.t_bar)
    return solver.choose_alpha_gradiometry(eps, eta, cfg.p, cfg.radius)


def _linear_fit(x: np.ndarray, y: np.ndarray) -> SweepFit:
    coeffs = np.polyfit(x, y, 1)
    pred = np.polyval(coeffs, x)
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return SweepFit(slope=float(coeffs[0]), intercept=float(coeffs[1]), r_squared=r2, n_points=len(x))


def run_rate_study(cfg: ExperimentConfig, keep_solutions: bool = False) -> RateStudyReport:
    """Run the eta sweep (eps = 0) and eps sweep (eta = 0) for one problem.

    Cells whose eta exceeds eta0 = delta0 (b-1)/(2b) are excluded from the
    inequality checks and the rate fit (the bounds do not apply there); they
    are still solved and reported.
    """
    op = _build_operator(cfg)
    profile = interp_profile(op.manifold, op.weight).scaled(op.norm_bound)
    eta0 = profile.delta0 * (_B - 1.0) / (2.0 * _B)
    cells = [(e, 0.0) for e in cfg.eps_grid] + [(0.0, h) for h in cfg.eta_grid]

    rows: list[RateRow] = []
    energy_violations = []
    rate_violations = []
    skipped_eta = sorted({h for _, h in cells if h > eta0})
    l1_wins = 0
    l1_cells = 0
    non_converged = 0
    solutions = []

    per_seed: dict[int, dict] = {}
    for seed in cfg.seeds:
        source = operators.make_source(op, cfg.p, seed)
        gdag = operators.apply(op, source.udag)
        amplitude = cfg.amplitude_factor * gdag.sup_norm()
        per_seed[seed] = {"source": source, "gdag": gdag, "amplitude": amplitude, "fhat": []}

        for idx, (eps, eta) in enumerate(cells):
            inst = noise_mod.make_impulsive(
                op.grid, eta, eps, amplitude if eta > 0 else 0.0,
                _cell_seed(seed, idx), contiguous=not cfg.scattered,
            )
            gobs = gdag.values + inst.xi
            alpha = _choose_alpha(cfg, inst.epsilon_measured, inst.eta_measured, profile)
            if alpha is None:
                alpha = cfg.alpha_grid[idx % len(cfg.alpha_grid)]
            prob = solver.TikhonovProblem(op, gobs, alpha, r=1)
            res = solver.solve_l1(prob, tol=cfg.tol, max_iter=cfg.max_iter)
            err = solver.bregman(res.f_hat, source.udag)
            rows.append(
                RateRow(
                    eps=eps, eta=eta, alpha=alpha, bregman_error=err,
                    residual_l1=res.residual_l1, iterations=res.iterations,
                    converged=res.converged, seed=seed,
                )
            )
            if not res.converged:
                non_converged += 1
            per_seed[seed]["fhat"].append((eps, eta, alpha, res))
            if keep_solutions:
                solutions.append(res)

            if eta > 0 and eps == 0.0:
                l2res = solver.solve_l2(solver.TikhonovProblem(op, gobs, alpha, r=2))
                l1_cells += 1
                if err <= solver.bregman(l2res.f_hat, source.udag):
                    l1_wins += 1

            if eta <= profile.delta0 / 2.0:
                ok = solver.energy_bound_check(
                    res, source.udag, alpha, inst.epsilon_measured, inst.eta_measured, profile
                )
                if not ok:
                    energy_violations.append((eps, eta, seed))

    # fit the smoothness-inequality scale per seed, then check the rate bounds
    for seed in cfg.seeds:
        info = per_seed[seed]
        phi = solver.fit_phi_scale(
            op, info["source"].udag, 2.0 * info["source"].smoothing_index, cfg.beta,
            cfg.vsc_samples, seed, extra_points=[r.f_hat for (_, _, _, r) in info["fhat"]],
        )
        info["phi"] = phi
        w = op.grid.weights
        a = solver.design_matrix(op)
        for (eps, eta, alpha, res) in info["fhat"]:
            if eta > eta0:
                continue
            residual_true = float(np.sum(w * np.abs(a @ res.f_hat.coeffs - info["gdag"].values)))
            err = solver.bregman(res.f_hat, info["source"].udag)
            chk = solver.rate_bound_check(
                err, residual_true, alpha, eps, eta, profile, phi, cfg.beta, b=_B
            )
            if not (chk.bregman_holds and chk.residual_holds):
                rate_violations.append((eps, eta, seed))

    eta_fit = _fit_eta_sweep(rows, eta0)
    eps_fit = _fit_eps_sweep(rows, cfg)
    target = 2.0 * cfg.p if cfg.problem == "heat" else cfg.p
    return RateStudyReport(
        rows=rows,
        eta_fit=eta_fit,
        eps_fit=eps_fit,
        eta_exponent_target=target,
        l1_l2_wins=l1_wins,
        l1_l2_cells=l1_cells,
        energy_violations=energy_violations,
        rate_violations=rate_violations,
        skipped_eta=skipped_eta,
        non_converged=non_converged,
    )


def _fit_eta_sweep(rows, eta0) -> SweepFit | None:
    cells: dict[float, list[float]] = {}
    for r in rows:
        if r.eps == 0.0 and 0.0 < r.eta <= eta0:
            cells.setdefault(r.eta, []).append(r.bregman_error)
    if len(cells) < 2:
        return None
    etas = np.array(sorted(cells))
    means = np.array([np.mean(cells[e]) for e in etas])
    keep = means > 0
    if keep.sum() < 2:
        return None
    return _linear_fit(np.log(etas[keep]), np.log(means[keep]))


def _fit_eps_sweep(rows, cfg) -> SweepFit | None:
    p_eff = cfg.p if cfg.problem == "heat" else 2.0 * cfg.p
    cells: dict[float, list[float]] = {}
    for r in rows:
        if r.eta == 0.0 and 0.0 < r.eps < 1.0:
            cells.setdefault(r.eps, []).append(r.bregman_error)
    if len(cells) < 2:
        return None
    eps = np.array(sorted(cells))
    x = (-np.log(eps)) ** (-p_eff)
    y = np.array([np.mean(cells[e]) for e in eps])
    return _linear_fit(x, y)


# ---------------------------------------------------------------------------
# interpolation study


@dataclass
class InterpStudyReport:
    n_samples: int
    n_deltas: int
    violations: list
    max_tightness: float


def study_grid(manifold: Manifold, cfg: ExperimentConfig) -> Grid:
    if manifold is Manifold.CIRCLE:
        return circle_grid(min(cfg.bandwidth, 64))
    if manifold is Manifold.INTERVAL:
        return interval_grid(min(cfg.bandwidth, 64))
    return sphere_grid(min(cfg.max_degree, 16))


def study_weight(cfg: ExperimentConfig) -> analytic.WeightFunction:
    name = cfg.weight or ("heat" if cfg.problem == "heat" else "gradiometry")
    if name == "heat":
        return analytic.heat_weight(cfg.t_bar)
    if name == "gradiometry":
        return analytic.gradiometry_weight(cfg.radius)
    if name == "indicator":
        return analytic.indicator_weight(cfg.b_width)
    raise ConfigError(f"unknown weight {name!r}")


def run_interp_study(
    manifold: Manifold,
    weight: analytic.WeightFunction,
    samples: int,
    delta_grid: np.ndarray,
    seed: int,
    grid: Grid | None = None,
) -> InterpStudyReport:
    """Certify the interpolation inequality on random unit-ball functions."""
    profile = interp_profile(manifold, weight)
    delta_grid = np.asarray(delta_grid, dtype=float)
    if np.any(delta_grid <= 0) or np.any(delta_grid > profile.delta0):
        raise InputError(f"delta grid must lie in (0, {profile.delta0:g}]")
    if grid is None:
        grid = study_grid(manifold, ExperimentConfig())
    rng = np.random.default_rng(seed)
    violations = []
    tightness = 0.0
    for i in range(samples):
        g = sample_unit_ball(grid, weight, rng)
        nrm = analytic.anorm(g, weight)
        for delta in delta_grid:
            res = analytic.interp_check(g, profile, float(delta), anorm_value=nrm)
            if res.rhs > 0:
                tightness = max(tightness, res.lhs / res.rhs)
            if not res.holds:
                violations.append((i, float(delta)))
    return InterpStudyReport(
        n_samples=samples,
        n_deltas=len(delta_grid),
        violations=violations,
        max_tightness=tightness,
    )


def default_delta_grid(profile: analytic.InterpProfile, n: int = 20) -> np.ndarray:
    return np.geomspace(profile.delta0 / 100.0, profile.delta0, n)


# ---------------------------------------------------------------------------
# CSV emission


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit_csv(rows: list, path: str) -> None:
    """Write rate rows with a fixed header, 17 significant digits and LF endings.

    Rows are ordered lexicographically by (eps, eta) cell and then seed, so
    repeated runs of the same configuration are byte-identical.
    """
    ordered = sorted(rows, key=lambda r: (r.eps, r.eta, r.seed))
    lines = ["eps,eta,alpha,bregman_error,residual_l1,iterations,converged,seed"]
    for r in ordered:
        lines.append(
            ",".join(
                [
                    _fmt(r.eps),
                    _fmt(r.eta),
                    _fmt(r.alpha),
                    _fmt(r.bregman_error),
                    _fmt(r.residual_l1),
                    str(r.iterations),
                    "true" if r.converged else "false",
                    str(r.seed),
                ]
            )
        )
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str) -> list:
    """Round-trip reader for emitted rate rows."""
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "eps,eta,alpha,bregman_error,residual_l1,iterations,converged,seed":
            raise InputError("unexpected CSV header")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != 8:
                raise InputError("malformed CSV row")
            rows.append(
                RateRow(
                    eps=float(parts[0]),
                    eta=float(parts[1]),
                    alpha=float(parts[2]),
                    bregman_error=float(parts[3]),
                    residual_l1=float(parts[4]),
                    iterations=int(parts[5]),
                    converged=parts[6] == "true",
                    seed=int(parts[7]),
                )
            )
    return rows
