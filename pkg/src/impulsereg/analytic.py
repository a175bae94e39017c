"""Weight functions, convex conjugates and interpolation inequalities.

A weight lambda measures how fast analytic extensions may grow: along strip
lines for the circle, on Bernstein ellipses for the interval, and through
circle averages for the sphere.  The conjugate lambda*(s) = sup_r [s r -
lambda(r)] controls coefficient decay; combining the induced approximation
error with the projection-kernel bound yields an inequality

    sup|g| <= gamma(delta) * ||g||_weighted + (1/delta) * ||g||_L1

that converts smallness of a corrupted region into smallness of effective
noise.  All norm estimators here return certified lower bounds of the true
weighted norms (grid suprema plus per-mode ridge values).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DiagnosticError, InputError
from .spectral import (
    Grid,
    Manifold,
    SpectralFunction,
    analyze,
    coeff_degrees,
    legendre_recurrence,
    sphere_degree_values,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_EXP_CLIP = 700.0


# ---------------------------------------------------------------------------
# weight functions and Fenchel conjugates


@dataclass(frozen=True)
class WeightFunction:
    """Increasing weight r -> lambda(r) on [0, inf) with values in R u {+inf}.

    ``b_lambda`` is the supremum of the finite domain (may be ``inf``).  When a
    closed-form conjugate or maximizer is known it is attached; the numeric
    conjugate is always available for cross-checking.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    b_lambda: float
    conjugate_fn: Callable[[float], float] | None = None
    argmax_fn: Callable[[float], float] | None = None

    def __call__(self, r):
        arr = np.atleast_1d(np.asarray(r, dtype=float))
        out = self.fn(arr)
        return float(out[0]) if np.ndim(r) == 0 else out

    def conjugate(self, s: float) -> float:
        if self.conjugate_fn is not None:
            return float(self.conjugate_fn(float(s)))
        return self.conjugate_numeric(s)

    def conjugate_numeric(self, s: float, tol: float = 1e-10) -> float:
        return _numeric_conjugate(self, float(s), tol)

    def ridge_argmax(self, s: float) -> float:
        """Maximizer r* of r -> s*r - lambda(r) (numeric fallback)."""
        if self.argmax_fn is not None:
            return float(self.argmax_fn(float(s)))
        return _numeric_conjugate(self, float(s), 1e-12, return_argmax=True)


def heat_weight(t_bar: float) -> WeightFunction:
    """Quadratic weight r^2 / (4 t_bar); conjugate s^2 t_bar, maximizer 2 s t_bar."""
    if t_bar <= 0:
        raise InputError("t_bar must be positive")
    return WeightFunction(
        name=f"heat(t_bar={t_bar:g})",
        fn=lambda r: np.square(r) / (4.0 * t_bar),
        b_lambda=math.inf,
        conjugate_fn=lambda s: s * s * t_bar,
        argmax_fn=lambda s: 2.0 * s * t_bar,
    )


def gradiometry_weight(radius: float) -> WeightFunction:
    """Weight -4 ln(R - e^r) on [0, ln R); +inf beyond.

    The conjugate is 4 ln(R-1) for s <= 4/(R-1) (maximum at r = 0) and
    s ln(sR/(4+s)) + 4 ln(4R/(4+s)) otherwise, with maximizer
    e^r = sR/(4+s).
    """
    if radius <= 1.0:
        raise InputError("satellite radius must exceed 1")
    b = math.log(radius)

    def fn(r):
        r = np.asarray(r, dtype=float)
        inside = r < b
        out = np.full(r.shape, math.inf)
        er = np.exp(np.where(inside, r, 0.0))
        out[inside] = -4.0 * np.log(radius - er[inside])
        return out

    s_knee = 4.0 / (radius - 1.0)

    def conj(s):
        if s <= s_knee:
            return 4.0 * math.log(radius - 1.0)
        return s * math.log(s * radius / (4.0 + s)) + 4.0 * math.log(
            4.0 * radius / (4.0 + s)
        )

    def argmax(s):
        if s <= s_knee:
            return 0.0
        return math.log(s * radius / (4.0 + s))

    return WeightFunction(
        name=f"gradiometry(R={radius:g})",
        fn=fn,
        b_lambda=b,
        conjugate_fn=conj,
        argmax_fn=argmax,
    )


def indicator_weight(b: float) -> WeightFunction:
    """Zero on [0, b], +inf beyond; conjugate b*s with maximizer b."""
    if b <= 0:
        raise InputError("indicator width must be positive")

    def fn(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= b, 0.0, math.inf)

    return WeightFunction(
        name=f"indicator(B={b:g})",
        fn=fn,
        b_lambda=b,
        conjugate_fn=lambda s: b * s,
        argmax_fn=lambda s: b,
    )


def _golden_max(h: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, c = lo, hi
    b = c - _GOLDEN * (c - a)
    d = a + _GOLDEN * (c - a)
    hb, hd = h(b), h(d)
    while c - a > tol:
        if hb >= hd:
            c, d, hd = d, b, hb
            b = c - _GOLDEN * (c - a)
            hb = h(b)
        else:
            a, b, hb = b, d, hd
            d = a + _GOLDEN * (c - a)
            hd = h(d)
    r = b if hb >= hd else d
    return r, max(hb, hd)


def _numeric_conjugate(w: WeightFunction, s: float, tol: float, return_argmax: bool = False):
    if s < 0:
        raise InputError("conjugate argument must be nonnegative")

    def h(r):
        val = float(w(np.array([r]))[0])
        return -math.inf if math.isinf(val) else s * r - val

    if math.isfinite(w.b_lambda):
        hi = w.b_lambda * (1.0 - 1e-9)
    else:
        # expand until the objective clearly decays (weight grows superlinearly)
        hi = 1.0
        best = max(h(0.0), h(hi))
        while hi < 1e9:
            cand = h(2.0 * hi)
            if cand < best - 1.0:
                hi *= 2.0
                break
            best = max(best, cand)
            hi *= 2.0
        else:
            raise DiagnosticError(f"conjugate of {w.name} appears unbounded at s={s}")

    grid = np.concatenate([[0.0], np.geomspace(1e-6, hi, 512)])
    vals = np.array([h(r) for r in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    up = grid[min(i + 1, len(grid) - 1)]
    if up <= lo:
        r_best, v_best = grid[i], vals[i]
    else:
        r_best, v_best = _golden_max(h, lo, up, tol)
        if vals[i] > v_best:
            r_best, v_best = grid[i], vals[i]
    return r_best if return_argmax else v_best


def fenchel_conjugate(w: WeightFunction, s: float) -> float:
    """lambda*(s) = sup_{r >= 0} [s r - lambda(r)]."""
    return w.conjugate(s)


# ---------------------------------------------------------------------------
# index functions and their conjugate-type transform


@dataclass(frozen=True)
class PowerLogIndex:
    """Logarithmic index t -> scale * (-ln t)^(-p) on (0, e^-1], 0 at 0.

    Beyond t = e^-1 the function continues linearly with slope scale*p*e, the
    tangent at the matching point.  Only the behavior near zero enters the
    rate statements.
    """

    p: float
    scale: float = 1.0

    def __call__(self, t):
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(arr < 0):
            raise InputError("index functions are defined on [0, inf)")
        e_inv = math.exp(-1.0)
        out = np.zeros(arr.shape)
        core = (arr > 0) & (arr <= e_inv)
        out[core] = (-np.log(arr[core])) ** (-self.p)
        ext = arr > e_inv
        out[ext] = 1.0 + self.p * math.e * (arr[ext] - e_inv)
        out *= self.scale
        return float(out[0]) if np.ndim(t) == 0 else out

    @property
    def max_slope(self) -> float:
        return self.scale * self.p * math.e


@dataclass(frozen=True)
class LinearIndex:
    """Linear index t -> c * t (exact-penalization case)."""

    c: float

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0):
            raise InputError("index functions are defined on [0, inf)")
        out = self.c * arr
        return float(out) if np.ndim(t) == 0 else out


def phi_p(t, p: float):
    """Convenience wrapper for the unscaled logarithmic index function."""
    if p <= 0:
        raise InputError("p must be positive")
    return PowerLogIndex(p)(t)


def psi(alpha: float, phi) -> float:
    """sup_{tau >= 0} [phi(tau) - tau/alpha], the approximation-error profile.

    Computed on a log grid in tau with golden-section refinement; returns
    ``inf`` when the linear tail of phi outruns tau/alpha.
    """
    if alpha <= 0:
        raise InputError("alpha must be positive")
    if isinstance(phi, LinearIndex):
        return 0.0 if phi.c <= 1.0 / alpha else math.inf
    if isinstance(phi, PowerLogIndex) and phi.max_slope >= 1.0 / alpha:
        return math.inf

    taus = np.concatenate([[0.0], np.geomspace(1e-320, 10.0, 6000)])
    vals = np.asarray(phi(taus)) - taus / alpha
    i = int(np.argmax(vals))
    best = float(vals[i])
    if 0 < i < len(taus) - 1 and taus[i - 1] > 0:
        lo, hi = math.log(taus[i - 1]), math.log(taus[i + 1])

        def h(u):
            t = math.exp(u)
            return float(phi(np.array([t]))[0]) - t / alpha

        _, refined = _golden_max(h, lo, hi, 1e-13)
        best = max(best, refined)
    return max(best, 0.0)


# ---------------------------------------------------------------------------
# weighted-norm estimators

_N_LINE = 160
_N_ANGLE = 96


def _log_abs(values: np.ndarray) -> np.ndarray:
    out = np.full(values.shape, -math.inf)
    nz = values != 0
    out[nz] = np.log(np.abs(values[nz]))
    return out


def _safe_exp(exponents: np.ndarray) -> np.ndarray:
    if np.any(exponents > _EXP_CLIP):
        raise DiagnosticError(
            "analytic extension overflows: coefficients grow faster than exp(-lambda*)"
        )
    return np.exp(np.maximum(exponents, -_EXP_CLIP))


def _line_grid(w: WeightFunction, degrees: np.ndarray) -> np.ndarray:
    """Heights/ellipse parameters to probe: dense grid plus per-mode maximizers."""
    ridge = [w.ridge_argmax(float(n)) for n in np.unique(degrees) if n > 0]
    if math.isfinite(w.b_lambda):
        hi = w.b_lambda * (1.0 - 1e-9)
    else:
        hi = max(ridge, default=1.0) * 1.5 + 1.0
    lam_hi = float(w(np.array([hi]))[0])
    while not math.isinf(lam_hi) and lam_hi > _EXP_CLIP - 10 and hi > 1e-6:
        hi *= 0.9
        lam_hi = float(w(np.array([hi]))[0])
    base = np.linspace(0.0, hi, _N_LINE)
    pts = np.unique(np.clip(np.concatenate([base, ridge]), 0.0, hi))
    return pts


def anorm_circle(g: SpectralFunction, w: WeightFunction) -> float:
    """Weighted sup of the strip extension of g; a lower bound of the true norm.

    The extension sum_n g_hat(n) e^{in(x+iy)} is evaluated with the weight
    folded into each term so that intermediate magnitudes stay bounded by the
    norm itself.  A per-mode ridge bound |g_hat(n)| e^{lambda*(|n|)} is taken
    as an additional certified lower bound.
    """
    if g.manifold is not Manifold.CIRCLE:
        raise InputError("anorm_circle expects a circle function")
    fc = g.fourier_coefficients()
    big_n = g.bandwidth
    modes = np.arange(-big_n, big_n + 1)
    logmag = _log_abs(fc)
    phases = np.angle(fc)

    best = 0.0
    nz = logmag > -math.inf
    for n, lm in zip(np.abs(modes[nz]), logmag[nz]):
        lam_star = w.conjugate(float(n)) if n > 0 else -float(w(np.array([0.0]))[0])
        best = max(best, math.exp(min(lm + lam_star, _EXP_CLIP)))

    ys = _line_grid(w, np.abs(modes))
    lam = w(ys)
    x = -math.pi + 2.0 * math.pi * np.arange(4 * max(big_n, 1)) / (4 * max(big_n, 1))
    phase_mat = np.exp(1j * (np.outer(modes, x) + phases[:, None]))
    for y, lam_y in zip(ys, lam):
        if math.isinf(lam_y):
            continue
        expo = logmag + modes * y - lam_y
        if not np.any(expo > -math.inf):
            continue
        amp = _safe_exp(expo)
        vals = np.abs(amp @ phase_mat)
        best = max(best, float(vals.max()))
    return best


def chebyshev_coefficients(g: SpectralFunction) -> np.ndarray:
    """Chebyshev coefficients a_0..a_N with g = a_0/2 + sum_{n>=1} a_n T_n.

    Exact for the stored polynomial degree; computed from values at
    Chebyshev points via the discrete cosine orthogonality.
    """
    if g.manifold is not Manifold.INTERVAL:
        raise InputError("chebyshev_coefficients expects an interval function")
    n = g.bandwidth
    m = 2 * (n + 1)
    s = math.pi * (np.arange(m) + 0.5) / m
    x = np.cos(s)
    p = legendre_recurrence(n, x)
    scale = np.sqrt(np.arange(n + 1) + 0.5)
    vals = (p * scale[:, None]).T @ g.coeffs
    a = np.array([2.0 / m * np.sum(vals * np.cos(k * s)) for k in range(n + 1)])
    return a


def chebyshev_truncate(g: SpectralFunction, m: int) -> SpectralFunction:
    """Truncate the Chebyshev expansion after degree m (not the L2 projection)."""
    a = chebyshev_coefficients(g)
    a[m + 1 :] = 0.0
    return from_chebyshev(g.grid, a)


def from_chebyshev(grid: Grid, a: np.ndarray) -> SpectralFunction:
    """Interval function from Chebyshev coefficients (a_0/2 convention)."""
    a = np.asarray(a, dtype=float)
    deg = a.shape[0] - 1
    x = grid.nodes
    t = np.arccos(np.clip(x, -1.0, 1.0))
    vals = a[0] / 2.0 + sum(a[n] * np.cos(n * t) for n in range(1, deg + 1))
    return analyze(np.asarray(vals, dtype=float), grid, max_degree=deg)


def _anorm_interval_from_cheb(a: np.ndarray, w: WeightFunction, real_sup: float) -> float:
    deg = a.shape[0] - 1
    logmag = _log_abs(a)

    lam0 = float(w(np.array([0.0]))[0])
    best = max(real_sup * math.exp(-lam0), abs(a[0]) / 2.0 * math.exp(-lam0))
    for n in range(1, deg + 1):
        if logmag[n] == -math.inf:
            continue
        best = max(best, 0.5 * math.exp(min(logmag[n] + w.conjugate(n), _EXP_CLIP)))

    ts = _line_grid(w, np.arange(deg + 1))
    theta = 2.0 * math.pi * np.arange(_N_ANGLE) / _N_ANGLE
    n_pos = np.arange(1, deg + 1)
    e_plus = np.exp(1j * np.outer(n_pos, theta))
    sgn = np.sign(a[1:])
    for t, lam_t in zip(ts, w(ts)):
        if math.isinf(lam_t) or t == 0.0:
            continue
        ex_p = logmag[1:] + n_pos * t - lam_t
        ex_m = logmag[1:] - n_pos * t - lam_t
        if not np.any(ex_p > -math.inf):
            continue
        amp_p = 0.5 * sgn * _safe_exp(ex_p)
        amp_m = 0.5 * sgn * _safe_exp(ex_m)
        vals = np.abs(
            a[0] / 2.0 * math.exp(-lam_t) + amp_p @ e_plus + amp_m @ np.conj(e_plus)
        )
        best = max(best, float(vals.max()))
    return best


def anorm_interval(g: SpectralFunction, w: WeightFunction) -> float:
    """Weighted sup of the Bernstein-ellipse extension; certified lower bound."""
    a = chebyshev_coefficients(g)
    return _anorm_interval_from_cheb(a, w, g.sup_norm())


def _cheb_of_legendre(max_degree: int) -> np.ndarray:
    """Matrix C with column l holding the Chebyshev coefficients of P_l."""
    m = 2 * (max_degree + 1)
    s = math.pi * (np.arange(m) + 0.5) / m
    x = np.cos(s)
    p = legendre_recurrence(max_degree, x)
    cos_mat = np.cos(np.outer(np.arange(max_degree + 1), s))
    return 2.0 / m * cos_mat @ p.T


def anorm_sphere(g: SpectralFunction, w: WeightFunction) -> float:
    """sup over grid nodes x of the interval norm of the circle-average profile t -> (Mg)(x, t)."""
    if g.manifold is not Manifold.SPHERE:
        raise InputError("anorm_sphere expects a sphere function")
    big_l = g.bandwidth
    comp = sphere_degree_values(g)  # (n_nodes, L+1), degree components at nodes
    cheb = comp @ _cheb_of_legendre(big_l).T  # per-node Chebyshev coefficients of Mg(x, .)

    # real-interval sup of each profile
    t_real = np.linspace(-1.0, 1.0, 4 * (big_l + 1) + 9)
    p_real = legendre_recurrence(big_l, t_real)
    real_sup = np.max(np.abs(comp @ p_real), axis=1)

    lam0 = float(w(np.array([0.0]))[0])
    best = float(np.max(real_sup)) * math.exp(-lam0)

    logmag = _log_abs(cheb)  # (n_nodes, L+1)
    conj_vals = np.array([w.conjugate(n) if n > 0 else -lam0 for n in range(big_l + 1)])
    ridge = logmag + conj_vals[None, :] + math.log(0.5)
    ridge[:, 0] = logmag[:, 0] + math.log(0.5) - lam0
    finite = ridge[ridge > -math.inf]
    if finite.size:
        best = max(best, float(np.exp(np.minimum(finite.max(), _EXP_CLIP))))

    ts = _line_grid(w, np.arange(big_l + 1))
    theta = 2.0 * math.pi * np.arange(_N_ANGLE) / _N_ANGLE
    n_pos = np.arange(1, big_l + 1)
    e_plus = np.exp(1j * np.outer(n_pos, theta))
    sgn = np.sign(cheb[:, 1:])
    lm = logmag[:, 1:]
    for t, lam_t in zip(ts, w(ts)):
        if math.isinf(lam_t) or t == 0.0:
            continue
        ex_p = lm + n_pos[None, :] * t - lam_t
        if not np.any(ex_p > -math.inf):
            continue
        amp_p = 0.5 * sgn * _safe_exp(ex_p)
        amp_m = 0.5 * sgn * _safe_exp(lm - n_pos[None, :] * t - lam_t)
        vals = np.abs(
            (cheb[:, 0] / 2.0 * math.exp(-lam_t))[:, None]
            + amp_p @ e_plus
            + amp_m @ np.conj(e_plus)
        )
        best = max(best, float(vals.max()))
    return best


def anorm(g: SpectralFunction, w: WeightFunction) -> float:
    """Dispatch to the estimator matching the function's domain."""
    if g.manifold is Manifold.CIRCLE:
        return anorm_circle(g, w)
    if g.manifold is Manifold.INTERVAL:
        return anorm_interval(g, w)
    return anorm_sphere(g, w)


# ---------------------------------------------------------------------------
# interpolation profiles


@dataclass(frozen=True)
class InterpProfile:
    """Ingredients of the sup-norm interpolation inequality on one domain.

    ``gamma(delta)`` multiplies the weighted analytic norm; ``scale`` is an
    optional Lipschitz factor folded in when the inequality is used through a
    forward operator.  Conjugate values at integers are precomputed
    (build-once, read-many).
    """

    manifold: Manifold
    weight: WeightFunction
    m0: int
    a: float
    c_lambda: float
    d_lambda: float
    delta0: float
    scale: float = 1.0
    _conj_table: np.ndarray = field(default=None, repr=False)

    def conj(self, m: int) -> float:
        if m < self._conj_table.shape[0]:
            return float(self._conj_table[m])
        return self.weight.conjugate(m)

    def m_of_delta(self, delta: float) -> int:
        if delta <= 0:
            raise InputError("delta must be positive")
        if self.manifold is Manifold.CIRCLE:
            return math.floor(math.pi / delta - 0.5)
        if self.manifold is Manifold.INTERVAL:
            return math.floor(math.sqrt(2.0 / delta)) - 1
        return math.floor(math.sqrt(4.0 * math.pi / delta)) - 1

    def gamma(self, delta: float) -> float:
        """Prefactor of the weighted norm in the interpolation inequality."""
        if not 0 < delta <= self.delta0:
            raise InputError(f"delta must lie in (0, {self.delta0:g}]")
        m = self.m_of_delta(delta)
        decay = math.exp(max(-self.conj(m), -_EXP_CLIP))
        if self.manifold is Manifold.SPHERE:
            poly = self.c_lambda + math.sqrt(4.0 * math.pi / delta) * self.d_lambda
        else:
            poly = self.c_lambda
        return self.scale * poly * decay

    def scaled(self, factor: float) -> "InterpProfile":
        return replace(self, scale=self.scale * factor)


_CONJ_TABLE_SIZE = 4097


def interp_profile(
    manifold: Manifold, weight: WeightFunction, scale: float = 1.0, search_limit: int = 10_000
) -> InterpProfile:
    """Build the interpolation profile for a weight on one of the domains.

    Finds the smallest integer m0 with lambda*(m0) > 0 and positive increment
    a = lambda*(m0+1) - lambda*(m0), then the constants in front of the
    exponential decay and the largest admissible delta.
    """
    conj_cache: dict[int, float] = {}

    def conj(m: int) -> float:
        if m not in conj_cache:
            conj_cache[m] = weight.conjugate(m)
        return conj_cache[m]

    m0 = None
    for m in range(search_limit + 1):
        if conj(m) > 1e-12 and conj(m + 1) - conj(m) > 1e-12:
            m0 = m
            break
    if m0 is None:
        raise DiagnosticError(
            f"weight {weight.name} is too flat: conjugate not strictly increasing"
        )
    a = conj(m0 + 1) - conj(m0)

    if manifold is Manifold.SPHERE:
        c_lambda = 1.0 / (2.0 * (1.0 - math.exp(-a)) ** 2) + 1.0 / (
            4.0 * (1.0 - math.exp(-a))
        )
        d_lambda = 1.0 / (2.0 * (1.0 - math.exp(-a)))
        delta0 = 4.0 * math.pi / (m0 + 1) ** 2
    else:
        c_lambda = 2.0 / (math.exp(a) - 1.0)
        d_lambda = 0.0
        if manifold is Manifold.CIRCLE:
            delta0 = math.pi / (m0 + 0.5)
        else:
            delta0 = 2.0 / (m0 + 1) ** 2

    table = np.array([conj(m) for m in range(min(_CONJ_TABLE_SIZE, search_limit + 2))])
    return InterpProfile(
        manifold=manifold,
        weight=weight,
        m0=m0,
        a=a,
        c_lambda=c_lambda,
        d_lambda=d_lambda,
        delta0=delta0,
        scale=scale,
        _conj_table=table,
    )


def projection_error_bound(profile: InterpProfile, m: int) -> float:
    """Sup-norm bound for the degree-m truncation error of unit-norm functions."""
    if m < profile.m0:
        raise InputError(f"bound requires m >= m0 = {profile.m0}")
    decay = math.exp(max(-profile.conj(m), -_EXP_CLIP))
    if profile.manifold is Manifold.CIRCLE:
        return 2.0 * profile.c_lambda * decay
    if profile.manifold is Manifold.INTERVAL:
        return profile.c_lambda * decay
    return (profile.c_lambda + m * profile.d_lambda) * decay


@dataclass(frozen=True)
class InterpCheckResult:
    lhs: float
    rhs: float
    holds: bool
    gamma: float
    anorm: float
    delta: float


def interp_check(
    g: SpectralFunction, profile: InterpProfile, delta: float, anorm_value: float | None = None
) -> InterpCheckResult:
    """Evaluate both sides of the interpolation inequality for one function.

    ``anorm_value`` overrides the norm estimator when the caller knows a
    certified upper bound for the weighted norm (e.g. for constructively
    normalized samples).
    """
    if not 0 < delta <= profile.delta0:
        raise InputError(f"delta must lie in (0, {profile.delta0:g}]")
    if g.manifold is not profile.manifold:
        raise InputError("function and profile live on different domains")
    nrm = anorm(g, profile.weight) if anorm_value is None else float(anorm_value)
    gam = profile.gamma(delta)
    lhs = g.sup_norm()
    rhs = gam * nrm + g.l1_norm() / delta
    return InterpCheckResult(
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs * (1.0 + 1e-9),
        gamma=gam,
        anorm=nrm,
        delta=delta,
    )


# ---------------------------------------------------------------------------
# constructively bounded samples


def sample_unit_ball(grid: Grid, weight: WeightFunction, rng: np.random.Generator) -> SpectralFunction:
    """Random function whose true weighted norm is certified to be <= 1.

    Coefficients are drawn under the decay e^{-lambda*(degree)} and the
    function is divided by an explicit upper bound of its weighted norm
    (triangle inequality plus the pointwise bound e^{n r - lambda(r)} <=
    e^{lambda*(n)}), so the result lies in the closed unit ball.
    """
    manifold = grid.manifold
    deg = grid.max_degree
    degrees = coeff_degrees(manifold, deg)
    lam_star = np.array(
        [weight.conjugate(d) if d > 0 else -float(weight(np.array([0.0]))[0]) for d in range(deg + 1)]
    )
    decay = np.exp(np.maximum(-lam_star, -_EXP_CLIP))
    decay[lam_star > _EXP_CLIP] = 0.0

    raw = rng.uniform(-1.0, 1.0, size=degrees.shape[0]) * decay[degrees]
    if manifold is Manifold.CIRCLE:
        f = SpectralFunction(grid, raw)
        fc = f.fourier_coefficients()
        modes = np.abs(np.arange(-deg, deg + 1))
        bound = _ridge_sum(np.abs(fc), lam_star[modes])
    elif manifold is Manifold.INTERVAL:
        f = SpectralFunction(grid, raw)
        a = chebyshev_coefficients(f)
        mags = np.abs(a)
        mags[0] *= 0.5
        bound = _ridge_sum(mags, lam_star[: a.shape[0]])
    else:
        f = SpectralFunction(grid, raw)
        per_l = np.sqrt(
            np.array([np.sum(raw[degrees == ell] ** 2) for ell in range(deg + 1)])
        )
        weights_l = np.sqrt((2.0 * np.arange(deg + 1) + 1.0) / (4.0 * math.pi))
        bound = _ridge_sum(per_l * weights_l, lam_star)
    if bound <= 0.0:
        raise DiagnosticError("degenerate sample: all coefficients vanished")
    return SpectralFunction(grid, f.coeffs / bound)


def _ridge_sum(mags: np.ndarray, lam_star: np.ndarray) -> float:
    total = 0.0
    for mag, ls in zip(mags, lam_star):
        if mag == 0.0:
            continue
        total += math.exp(min(math.log(mag) + ls, _EXP_CLIP))
    return total
