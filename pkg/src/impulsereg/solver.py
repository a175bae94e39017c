"""Minimization of the Tikhonov functional with L1 or L2 data fidelity.

The r = 1 functional  (1/alpha) ||A f - g||_{L1} + ||f||_{L2}^2  is minimized
by an accelerated first-order primal-dual scheme (the quadratic penalty is
strongly convex, so the step sizes shrink geometrically), followed by an
active-set polish that solves the KKT system of the identified sign pattern
exactly.  Internally the solver works on the alpha-scaled functional
||A f - g||_{1,w} + alpha ||f||^2, which has identical minimizers and is well
conditioned for small alpha; reported objectives and gaps are converted back
to the 1/alpha scaling.

The r = 2 problem  (1/2) ||A f - g||_{L2}^2 + (alpha/2) ||f||^2  is solved in
closed form through the diagonal normal equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import InterpProfile, PowerLogIndex, psi
from .errors import InputError
from .noise import NoiseInstance
from .operators import DiagonalOperator, apply as op_apply
from .spectral import SpectralFunction, analyze

_B_DEFAULT = 2.0
_QPRIME_DEFAULT = 2.0


@dataclass(eq=False)
class TikhonovProblem:
    """One data-fidelity minimization instance on the operator's grid."""

    op: DiagonalOperator
    gobs: np.ndarray
    alpha: float
    r: int = 1

    def __post_init__(self):
        self.gobs = np.asarray(self.gobs, dtype=float)
        if self.alpha <= 0:
            raise InputError("alpha must be positive")
        if self.r not in (1, 2):
            raise InputError("fidelity exponent r must be 1 or 2")
        if self.gobs.shape != (self.op.grid.n_nodes,):
            raise InputError("observed data must live on the operator grid")


@dataclass(eq=False)
class SolveResult:
    f_hat: SpectralFunction
    objective: float
    residual_l1: float
    iterations: int
    pd_gap: float
    converged: bool
    subgrad_residual: float = math.nan
    polished: bool = False
    trace: list = field(default_factory=list, repr=False)


def design_matrix(op: DiagonalOperator, bandwidth: int | None = None) -> np.ndarray:
    """Nodal forward map: synthesis composed with the diagonal multipliers."""
    band = op.max_degree if bandwidth is None else bandwidth
    return op.grid.basis(band) * op.multipliers(band)[None, :]


def _operator_norm(a: np.ndarray, iters: int = 60) -> float:
    v = np.full(a.shape[1], 1.0 / math.sqrt(a.shape[1]))
    for _ in range(iters):
        u = a @ v
        v = a.T @ u
        nv = np.linalg.norm(v)
        if nv == 0:
            return 0.0
        v /= nv
    return float(np.linalg.norm(a @ v)) * 1.02


def _objective_scaled(a, w, g, alpha, f):
    r = a @ f - g
    return float(np.sum(w * np.abs(r)) + alpha * np.dot(f, f))


def _dual_value_scaled(a, g, alpha, q):
    at_q = a.T @ q
    return float(-np.dot(q, g) - np.dot(at_q, at_q) / (4.0 * alpha))


def solve_l1_system(
    a: np.ndarray,
    weights: np.ndarray,
    data: np.ndarray,
    alpha: float,
    tol: float = 1e-8,
    max_iter: int = 50_000,
    polish: bool = True,
    keep_trace: bool = False,
):
    """Minimize sum_i w_i |(A f)_i - g_i| + alpha ||f||_2^2 over coefficients f.

    Returns ``(f, info)`` where info records the iteration count, the duality
    gap of the scaled functional, the final dual variable and a subgradient
    residual ||A^T q + 2 alpha f|| / (1 + 2 alpha ||f||) of the scaled
    optimality system.

    An accelerated primal-dual phase exploits the strong convexity of the
    penalty; because its geometric rate degrades as alpha shrinks, the
    iterate is then refined by a Huber-smoothed Newton continuation whose
    duality gap is certified directly from the smoothing width.
    """
    a = np.asarray(a, dtype=float)
    w = np.asarray(weights, dtype=float)
    g = np.asarray(data, dtype=float)
    m, k = a.shape
    if w.shape != (m,) or g.shape != (m,):
        raise InputError("weights/data shape mismatch with the design matrix")
    if alpha <= 0:
        raise InputError("alpha must be positive")

    norm_a = _operator_norm(a)
    if norm_a == 0.0:
        raise InputError("zero forward operator")
    tau = 0.95 / norm_a
    sig = 0.95 / norm_a
    gamma = 2.0 * alpha

    f = np.zeros(k)
    fbar = f.copy()
    q = np.zeros(m)
    trace: list[tuple[int, float, float]] = []

    check_every = 25
    it = 0
    gap = math.inf
    obj = _objective_scaled(a, w, g, alpha, f)
    best = (f.copy(), q.copy(), obj, gap)
    g_scale = max(1.0, float(np.max(np.abs(g), initial=0.0)))
    gap_floor = 2.0 * certificate_floor(a, w, alpha, g_scale, float(np.sum(w)))

    def _converged(gap_val, obj_val):
        # the float-precision certificate floor may relax the tolerance, but
        # never beyond three digits of relative accuracy
        limit = max(tol * (alpha + abs(obj_val)),
                    min(gap_floor, 1e-3 * (alpha + abs(obj_val))))
        return gap_val <= limit

    refine_at = min(500, max_iter)
    polished = False
    while it < max_iter:
        it += 1
        q = np.clip(q + sig * (a @ fbar - g), -w, w)
        f_new = (f - tau * (a.T @ q)) / (1.0 + 2.0 * tau * alpha)
        theta = 1.0 / math.sqrt(1.0 + 2.0 * gamma * tau)
        tau *= theta
        sig /= theta
        fbar = f_new + theta * (f_new - f)
        f = f_new

        if it % check_every == 0 or it >= max_iter or it >= refine_at:
            obj = _objective_scaled(a, w, g, alpha, f)
            gap = obj - _dual_value_scaled(a, g, alpha, q)
            if keep_trace:
                trace.append((it, obj, gap))
            if obj < best[2]:
                best = (f.copy(), q.copy(), obj, gap)
            if _converged(gap, obj):
                break
            if polish and it >= refine_at:
                refine_at = it + max(500, it)
                target = tol * (alpha + abs(best[2]))
                for refine in (_exchange_refine, _huber_refine):
                    ref = refine(a, w, g, alpha, best[0], target)
                    if ref is None:
                        continue
                    rf, rq, robj, rgap, nit = ref
                    it += nit
                    if robj <= best[2]:
                        best = (rf, rq, robj, rgap)
                    if _converged(rgap, robj):
                        polished = True
                        f, q, obj, gap = rf, rq, robj, rgap
                        if keep_trace:
                            trace.append((it, obj, gap))
                        return f, _Info(it, obj, gap, q, True, True,
                                        _subgrad_residual(a, alpha, f, q), trace)

    if best[2] < obj:
        f, q, obj, gap = best
    return f, _Info(it, obj, gap, q, polished, _converged(gap, obj),
                    _subgrad_residual(a, alpha, f, q), trace)


@dataclass(eq=False)
class _Info:
    iterations: int
    objective_scaled: float
    gap_scaled: float
    dual: np.ndarray
    polished: bool
    converged: bool
    subgrad_residual: float
    trace: list


def _subgrad_residual(a, alpha, f, q) -> float:
    r = a.T @ q + 2.0 * alpha * f
    return float(np.linalg.norm(r) / (1.0 + 2.0 * alpha * np.linalg.norm(f)))


def certificate_floor(a, w, alpha, g_scale, sum_w):
    """Smallest duality gap certifiable in float64 for this system.

    The gap carries a term ||A^T q + 2 alpha f||^2 / (4 alpha); the numerator
    cannot be evaluated below the rounding noise of A^T (w psi), so for tiny
    alpha the certificate saturates at roughly (noise)^2 / (4 alpha) plus the
    residual rounding in the primal-dual pairing.
    """
    eps_m = float(np.finfo(float).eps)
    col_l1 = np.abs(a).T @ w
    e_noise = 8.0 * eps_m * float(np.linalg.norm(col_l1))
    pairing_noise = 8.0 * eps_m * sum_w * g_scale
    return e_noise**2 / (4.0 * alpha) + pairing_noise


def _visible_columns(a, g_scale):
    col_inf = np.max(np.abs(a), axis=0)
    return col_inf > 1e-13 * max(g_scale, float(col_inf.max(initial=0.0)))


def _pattern_solve(a, w, g, alpha, s_full):
    """Exact minimizer for a fixed sign pattern (zero residual where s is 0).

    Singular values below 1e-12 of the largest and pattern-gradient
    components below float noise are treated as exact zeros, so tiny alpha
    cannot amplify rounding junk along unconstrained directions.
    """
    m, k = a.shape
    active = s_full != 0.0
    zero_set = ~active
    nz = int(zero_set.sum())
    c = a[active].T @ (w[active] * s_full[active]) if active.any() else np.zeros(k)
    try:
        if nz == 0:
            return -c / (2.0 * alpha), c
        a_z = a[zero_set]
        g_z = g[zero_set]
        if nz >= k:
            u, sv, vt = np.linalg.svd(a_z, full_matrices=False)
            rank = int(np.sum(sv > sv[0] * 1e-12)) if sv.size else 0
            if rank == 0:
                return None, c
            f_pol = vt[:rank].T @ ((u[:, :rank].T @ g_z) / sv[:rank])
            if rank < k:
                null_basis = vt[rank:].T
                cn = null_basis.T @ c
                cn[np.abs(cn) <= 1e-12 * max(1.0, float(np.max(np.abs(c), initial=0.0)))] = 0.0
                f_pol = f_pol + null_basis @ (-cn / (2.0 * alpha))
        else:
            gram = a_z @ a_z.T
            rhs = -2.0 * alpha * g_z - a_z @ c
            mu = np.linalg.lstsq(gram, rhs, rcond=None)[0]
            f_pol = -(c + a_z.T @ mu) / (2.0 * alpha)
    except np.linalg.LinAlgError:
        return None, c
    if not np.all(np.isfinite(f_pol)):
        return None, c
    return f_pol, c


def _exchange_refine(a, w, g, alpha, f0, target_gap, max_rounds=20):
    """Active-set exchange on the residual sign pattern, verified exactly.

    Nodes with zero pattern sign are constrained to zero residual; solving
    the pattern exactly, active nodes whose residual crosses zero enter the
    constrained set and constrained nodes whose dual multiplier leaves
    [-1, 1] become active with that sign.  A verified fixed point yields the
    exact minimizer with a matching dual certificate.  Suited to problems
    whose visible columns are numerically independent; degenerate spectra
    fail verification and fall back to the smoothed-Newton path.
    """
    m, _ = a.shape
    g_scale = max(1.0, float(np.max(np.abs(g), initial=0.0)))
    keep = _visible_columns(a, g_scale)
    if not keep.any():
        return None
    f_full_len = f0.shape[0]
    a_r = np.ascontiguousarray(a[:, keep])
    f = f0[keep].copy()
    scale = g_scale
    r = a_r @ f - g
    s_full = np.where(np.abs(r) > 1e-5 * scale, np.sign(r), 0.0)

    seen = set()
    result = None
    for _ in range(max_rounds):
        key = s_full.tobytes()
        if key in seen:
            break
        seen.add(key)
        f_pol, c = _pattern_solve(a_r, w, g, alpha, s_full)
        if f_pol is None:
            return None
        r_pol = a_r @ f_pol - g
        zero_set = s_full == 0.0
        qz = np.zeros(0)
        if zero_set.any():
            v = -2.0 * alpha * f_pol - c
            try:
                qz, *_ = np.linalg.lstsq(a_r[zero_set].T * w[zero_set][None, :], v, rcond=1e-11)
            except np.linalg.LinAlgError:
                return None
        crossed = (s_full != 0.0) & (np.sign(r_pol) * s_full <= 0)
        infeasible = np.abs(qz) > 1.0 + 1e-9
        if not crossed.any() and not infeasible.any():
            result = (f_pol, r_pol, c, s_full.copy(), qz)
            break
        s_new = s_full.copy()
        s_new[crossed] = 0.0
        if infeasible.any():
            idx = np.flatnonzero(zero_set)[infeasible]
            s_new[idx] = np.sign(qz[infeasible])
        s_full = s_new
    if result is None:
        return None

    f_pol, r_pol, c, s_full, qz = result
    zero_set = s_full == 0.0
    if zero_set.any() and np.max(np.abs(r_pol[zero_set]), initial=0.0) > 1e-8 * scale:
        return None
    q_pol = w * s_full
    if zero_set.any():
        q_pol[zero_set] = w[zero_set] * np.clip(qz, -1.0, 1.0)
    stat = a_r.T @ q_pol + 2.0 * alpha * f_pol
    stat_scale = max(1.0, float(np.max(np.abs(c), initial=0.0)),
                     2.0 * alpha * float(np.max(np.abs(f_pol), initial=0.0)))
    if float(np.max(np.abs(stat), initial=0.0)) > 1e-7 * stat_scale:
        return None
    obj = _objective_scaled(a_r, w, g, alpha, f_pol)
    gap = max(obj - _dual_value_scaled(a_r, g, alpha, q_pol), 0.0)
    f_out = np.zeros(f_full_len)
    f_out[keep] = f_pol
    return f_out, q_pol, obj, gap, len(seen)


def _huber_refine(a, w, g, alpha, f0, target_gap):
    """Newton continuation on the Huber-smoothed functional, with certificates.

    Replaces |r| by the Huber function of width mu and drives mu down; at a
    smoothed optimum the dual q = w clip(r/mu, -1, 1) is feasible and the gap
    splits into a smoothing part (at most mu sum(w)/4) and a stationarity
    part ||A^T q + 2 alpha f||^2 / (4 alpha).  Levels run until both parts
    fit the requested gap or its float-precision floor.  Coefficients whose
    columns cannot move any residual beyond float noise are pinned at zero:
    the data cannot see them, and dividing their noise by 2 alpha would only
    manufacture junk.  Returns ``(f, q, objective, gap, newton_iters)``.
    """
    sum_w = float(np.sum(w))
    g_scale = max(1.0, float(np.max(np.abs(g), initial=0.0)))
    col_inf = np.max(np.abs(a), axis=0)
    keep = col_inf > 1e-13 * max(g_scale, float(col_inf.max(initial=0.0)))
    if not keep.any():
        return None
    f_full = f0
    a = np.ascontiguousarray(a[:, keep])
    f = f0[keep].copy()
    col_l1 = np.abs(a).T @ w
    noise_floor = 1e-13 * col_l1 + 1e-300
    eps_m = float(np.finfo(float).eps)
    e_noise = 8.0 * eps_m * float(np.linalg.norm(col_l1))

    target_eff = max(target_gap, 2.0 * certificate_floor(a, w, alpha, g_scale, sum_w))
    # the smoothing budget must not inherit the stationarity float floor,
    # otherwise tiny alpha would leave mu (and the quadratic zone) huge
    mu_target = max(target_gap / sum_w, 1e-16 * g_scale)
    e_budget = max(math.sqrt(2.0 * alpha * target_eff), 2.0 * e_noise)
    r = a @ f - g
    mu = max(float(np.median(np.abs(r))) * 0.5, mu_target)
    total_newton = 0

    def smoothed(ff, rr, mu_):
        absr = np.abs(rr)
        hub = np.where(absr <= mu_, rr * rr / (2.0 * mu_), absr - mu_ / 2.0)
        return float(np.sum(w * hub) + alpha * np.dot(ff, ff))

    def certified(ff, mu_):
        rr = a @ ff - g
        qq = w * np.clip(rr / mu_, -1.0, 1.0)
        oo = _objective_scaled(a, w, g, alpha, ff)
        return ff.copy(), qq, oo, max(oo - _dual_value_scaled(a, g, alpha, qq), 0.0)

    best = certified(f, mu)
    tail_levels = 0
    for _level in range(200):
        for _it in range(80):
            r = a @ f - g
            psi_r = np.clip(r / mu, -1.0, 1.0)
            grad = a.T @ (w * psi_r) + 2.0 * alpha * f
            if float(np.linalg.norm(grad)) <= 0.5 * e_budget:
                break
            grad = grad.copy()
            grad[np.abs(grad) <= noise_floor + 1e-13 * 2.0 * alpha * np.abs(f)] = 0.0
            if not np.any(grad):
                break
            total_newton += 1
            # reweighted curvature w / max(|r|, mu) on every node: inside the
            # quadratic zone it is the exact Huber curvature, outside it
            # majorizes the kink, so steps stay stable when nodes cross the
            # zone boundary
            absr = np.abs(r)
            b = a * np.sqrt(w / np.maximum(absr, mu))[:, None]
            h = b.T @ b
            h[np.diag_indices_from(h)] += 2.0 * alpha
            d = np.sqrt(np.diag(h))
            d[d <= 0] = 1.0
            hs = h / d[:, None] / d[None, :]
            try:
                step = -np.linalg.solve(hs, grad / d) / d
            except np.linalg.LinAlgError:
                return None
            base = smoothed(f, r, mu)
            slope = float(np.dot(grad, step))
            if slope >= 0:
                break
            t = 1.0
            for _ls in range(60):
                f_try = f + t * step
                if smoothed(f_try, a @ f_try - g, mu) <= base + 1e-4 * t * slope:
                    f = f_try
                    break
                t *= 0.5
            else:
                break
        cand = certified(f, mu)
        if cand[3] < best[3] or (cand[2] <= best[2] and cand[3] <= best[3]):
            best = cand
        if best[3] <= target_eff:
            break
        if mu <= mu_target:
            tail_levels += 1
            if tail_levels >= 6:
                break
            mu_target *= 0.25
        mu = max(mu * 0.25, mu_target)

    f, q, obj, gap = best
    f_out = np.zeros(f_full.shape[0])
    f_out[keep] = f
    return f_out, q, obj, gap, total_newton


def solve_l1(
    prob: TikhonovProblem,
    tol: float = 1e-8,
    max_iter: int = 50_000,
    polish: bool = True,
    keep_trace: bool = False,
) -> SolveResult:
    """Solve the r = 1 problem (1/alpha)||T f - g||_L1 + ||f||_L2^2."""
    if prob.r != 1:
        raise InputError("solve_l1 requires r = 1")
    a = design_matrix(prob.op)
    w = prob.op.grid.weights
    f, info = solve_l1_system(
        a, w, prob.gobs, prob.alpha, tol=tol, max_iter=max_iter,
        polish=polish, keep_trace=keep_trace,
    )
    f_hat = SpectralFunction(prob.op.grid, f)
    residual = float(np.sum(w * np.abs(a @ f - prob.gobs)))
    return SolveResult(
        f_hat=f_hat,
        objective=info.objective_scaled / prob.alpha,
        residual_l1=residual,
        iterations=info.iterations,
        pd_gap=info.gap_scaled / prob.alpha,
        converged=info.converged,
        subgrad_residual=info.subgrad_residual,
        polished=info.polished,
        trace=info.trace,
    )


def solve_l2(prob: TikhonovProblem) -> SolveResult:
    """Closed-form minimizer of (1/2)||T f - g||_L2^2 + (alpha/2)||f||_L2^2.

    The diagonal normal equations give f_hat(n) = sigma_n g_hat(n) /
    (sigma_n^2 + alpha) coefficient-wise.
    """
    if prob.r != 2:
        raise InputError("solve_l2 requires r = 2")
    op = prob.op
    ghat = analyze(prob.gobs, op.grid).coeffs
    sigma = op.multipliers()
    coeffs = sigma * ghat / (sigma**2 + prob.alpha)
    f_hat = SpectralFunction(op.grid, coeffs)
    a = design_matrix(op)
    res = a @ coeffs - prob.gobs
    w = op.grid.weights
    objective = 0.5 * float(np.sum(w * res**2)) + 0.5 * prob.alpha * float(
        np.dot(coeffs, coeffs)
    )
    return SolveResult(
        f_hat=f_hat,
        objective=objective,
        residual_l1=float(np.sum(w * np.abs(res))),
        iterations=0,
        pd_gap=0.0,
        converged=True,
        subgrad_residual=0.0,
    )


def bregman(f: SpectralFunction, udag: SpectralFunction) -> float:
    """Squared L2 distance, the Bregman distance of the quadratic penalty."""
    if f.grid is not udag.grid and (
        f.manifold is not udag.manifold or f.grid.n_nodes != udag.grid.n_nodes
    ):
        raise InputError("functions live on different grids")
    n = max(f.coeffs.shape[0], udag.coeffs.shape[0])
    c1 = np.zeros(n)
    c2 = np.zeros(n)
    c1[: f.coeffs.shape[0]] = f.coeffs
    c2[: udag.coeffs.shape[0]] = udag.coeffs
    return float(np.sum((c1 - c2) ** 2))


# ---------------------------------------------------------------------------
# a-priori parameter choice rules

_ALPHA_FLOOR = 1e-280


def choose_alpha_heat(eps: float, eta: float, p: float, t_bar: float) -> float:
    """Balance alpha for the heat problem: max of the two regime choices.

    alpha_1 = eps (-ln eps)^p balances the eps term against the approximation
    term; alpha_2 = exp(-pi^2 t_bar / (16 eta^2)) balances the corrupted-set
    term.  Very small eta would underflow alpha_2; it is floored at 1e-280.
    """
    if eps < 0 or eta < 0:
        raise InputError("noise parameters must be nonnegative")
    if eps == 0 and eta == 0:
        raise InputError("at least one of eps, eta must be positive")
    alpha1 = eps * (-math.log(eps)) ** p if 0 < eps < 1 else (eps if eps >= 1 else 0.0)
    alpha2 = 0.0
    if eta > 0:
        alpha2 = math.exp(max(-math.pi**2 * t_bar / (16.0 * eta**2), math.log(_ALPHA_FLOOR)))
    return max(alpha1, alpha2, _ALPHA_FLOOR if eps == 0 else 0.0)


def choose_alpha_gradiometry(eps: float, eta: float, p: float, radius: float) -> float:
    """Balance alpha for gradiometry: eps branch in closed form, eta branch by root finding.

    The eta branch equates the corrupted-set error profile
    eta^-3 R^(-2 sqrt(pi/eta)) / (alpha R^3)^2 with the approximation term
    (-ln alpha)^(-2p), i.e. solves x = -ln k + p ln x for x = -ln alpha with
    k = eta^(-3/2) R^(-sqrt(pi/eta) - 3).
    """
    if eps < 0 or eta < 0:
        raise InputError("noise parameters must be nonnegative")
    if eps == 0 and eta == 0:
        raise InputError("at least one of eps, eta must be positive")
    if radius <= 1.0:
        raise InputError("satellite radius must exceed 1")
    alpha1 = eps * (-math.log(eps)) ** (2.0 * p) if 0 < eps < 1 else (eps if eps >= 1 else 0.0)
    alpha2 = 0.0
    if eta > 0:
        ln_k = -1.5 * math.log(eta) - (math.sqrt(math.pi / eta) + 3.0) * math.log(radius)

        def h(x):
            return x + p * math.log(x) + ln_k

        lo, hi = 1e-6, 700.0
        if h(hi) < 0:
            alpha2 = _ALPHA_FLOOR
        elif h(lo) > 0:
            alpha2 = math.exp(-lo)
        else:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if h(mid) < 0:
                    lo = mid
                else:
                    hi = mid
            alpha2 = math.exp(-0.5 * (lo + hi))
    return max(alpha1, alpha2, _ALPHA_FLOOR if eps == 0 else 0.0)


# ---------------------------------------------------------------------------
# inequality checks


def energy_bound_check(
    result: SolveResult,
    udag: SpectralFunction,
    alpha: float,
    eps: float,
    eta: float,
    profile: InterpProfile,
) -> bool:
    """Energy bound ||f_hat|| <= ||udag|| + sqrt(2 eps/alpha) + 2 eta gamma(2 eta)/alpha.

    ``profile`` must carry the operator's Lipschitz constant in its scale so
    that gamma is the combined smoothing constant.
    """
    if eta > profile.delta0 / 2.0:
        raise InputError("energy bound requires eta <= delta0 / 2")
    slack = 0.0
    if eta > 0:
        slack = 2.0 * eta * profile.gamma(2.0 * eta) / alpha
    rhs = udag.l2_norm() + math.sqrt(2.0 * eps / alpha) + slack
    return result.f_hat.l2_norm() <= rhs + 1e-9


@dataclass(frozen=True)
class RateBoundCheck:
    bregman_lhs: float
    bregman_rhs: float
    residual_lhs: float
    residual_rhs: float

    @property
    def bregman_holds(self) -> bool:
        return self.bregman_lhs <= self.bregman_rhs * (1.0 + 1e-9) + 1e-300

    @property
    def residual_holds(self) -> bool:
        return self.residual_lhs <= self.residual_rhs * (1.0 + 1e-9) + 1e-300


def rate_bound_check(
    bregman_error: float,
    residual_true_l1: float,
    alpha: float,
    eps: float,
    eta: float,
    profile: InterpProfile,
    phi,
    beta: float,
    b: float = _B_DEFAULT,
    qprime: float = _QPRIME_DEFAULT,
) -> RateBoundCheck:
    """Evaluate both convergence-rate inequalities for one solved cell.

    ``residual_true_l1`` is ||T f_hat - g_dagger||_L1 against the exact data.
    ``profile`` carries the combined smoothing constant; ``phi`` is the index
    function of the variational smoothness inequality with its fitted scale.
    """
    gamma_term = 0.0
    if eta > 0:
        delta = 2.0 * b / (b - 1.0) * eta
        if delta > profile.delta0:
            raise InputError("eta too large for the rate bounds")
        gamma_term = 2.0 * eta * profile.gamma(delta) / alpha
    breg_rhs = (
        2.0 * qprime / alpha * eps
        + beta ** (1.0 - qprime) * gamma_term**qprime
        + qprime * psi(b * alpha, phi)
    )
    res_rhs = (
        4.0 * qprime * eps
        + 2.0 * (alpha * gamma_term) ** qprime / (beta * alpha) ** (qprime - 1.0)
        + 2.0 * alpha * qprime * psi(2.0 * b * alpha, phi)
    )
    return RateBoundCheck(
        bregman_lhs=beta * bregman_error,
        bregman_rhs=breg_rhs,
        residual_lhs=residual_true_l1 / b,
        residual_rhs=res_rhs,
    )


# ---------------------------------------------------------------------------
# variational smoothness inequality


@dataclass(frozen=True)
class VscReport:
    violations: int
    margin: float
    samples: int


def _vsc_sides(op: DiagonalOperator, udag: SpectralFunction, f: SpectralFunction, phi, beta: float):
    w = op.grid.weights
    diff = op_apply(op, SpectralFunction(op.grid, f.coeffs - udag.coeffs))
    res = float(np.sum(w * np.abs(diff.values)))
    lhs = beta * bregman(f, udag)
    rhs = float(np.dot(f.coeffs, f.coeffs) - np.dot(udag.coeffs, udag.coeffs)) + float(
        phi(res)
    )
    return lhs, rhs


def vsc_check(
    op: DiagonalOperator,
    udag: SpectralFunction,
    phi,
    beta: float,
    samples: int,
    seed: int,
    radius: float = 2.0,
    extra_points: list[SpectralFunction] | None = None,
) -> VscReport:
    """Sample the variational smoothness inequality around udag.

    Draws ``samples`` points in a coefficient ball of the given radius around
    udag (plus any caller-supplied points) and reports the number of
    violations together with the worst margin rhs - lhs.
    """
    if not 0 < beta < 1:
        raise InputError("beta must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    worst = math.inf
    violations = 0
    total = 0
    points: list[SpectralFunction] = list(extra_points or [])
    for _ in range(samples):
        direction = rng.normal(size=udag.coeffs.shape[0])
        direction /= np.linalg.norm(direction)
        rho = rng.uniform(0.0, radius)
        points.append(SpectralFunction(op.grid, udag.coeffs + rho * direction))
    for f in points:
        lhs, rhs = _vsc_sides(op, udag, f, phi, beta)
        margin = rhs - lhs
        worst = min(worst, margin)
        total += 1
        if lhs > rhs + 1e-12:
            violations += 1
    return VscReport(violations=violations, margin=worst, samples=total)


def fit_phi_scale(
    op: DiagonalOperator,
    udag: SpectralFunction,
    p_index: float,
    beta: float,
    samples: int,
    seed: int,
    radius: float = 2.0,
    extra_points: list[SpectralFunction] | None = None,
    margin: float = 1.05,
) -> PowerLogIndex:
    """Fit the smallest scale making phi = scale * phi_{p_index} satisfy the inequality.

    The scale is the maximum over sampled points of the deficit divided by the
    unscaled index value, inflated by a small margin.
    """
    rng = np.random.default_rng(seed)
    base = PowerLogIndex(p_index)
    needed = 0.0
    points: list[SpectralFunction] = list(extra_points or [])
    for _ in range(samples):
        direction = rng.normal(size=udag.coeffs.shape[0])
        direction /= np.linalg.norm(direction)
        rho = rng.uniform(0.0, radius)
        points.append(SpectralFunction(op.grid, udag.coeffs + rho * direction))
    for f in points:
        w = op.grid.weights
        diff = op_apply(op, SpectralFunction(op.grid, f.coeffs - udag.coeffs))
        res = float(np.sum(w * np.abs(diff.values)))
        deficit = beta * bregman(f, udag) - (
            float(np.dot(f.coeffs, f.coeffs)) - float(np.dot(udag.coeffs, udag.coeffs))
        )
        if deficit > 0 and res > 0:
            needed = max(needed, deficit / float(base(res)))
    return PowerLogIndex(p_index, scale=max(needed * margin, 1e-12))


def noisy_observation(op: DiagonalOperator, udag: SpectralFunction, noise: NoiseInstance) -> np.ndarray:
    """Exact data plus the noise function, as nodal values on the operator grid."""
    if noise.grid is not op.grid:
        raise InputError("noise instance lives on a different grid")
    return op_apply(op, udag).values + noise.xi
