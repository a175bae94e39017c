"""Grids, basis transforms and projection machinery on three domains.

Supported domains are the circle R/2piZ, the interval (-1, 1) and the unit
sphere S^2.  Functions are stored as coefficient vectors with respect to a
real orthonormal basis (trigonometric, normalized Legendre, real spherical
harmonics) together with a quadrature grid whose weights integrate products
of band-limited functions exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from enum import Enum

import numpy as np
from scipy.special import gammaln, lpmv

from .errors import InputError

TWO_PI = 2.0 * math.pi


class Manifold(Enum):
    CIRCLE = "circle"
    INTERVAL = "interval"
    SPHERE = "sphere"

    @property
    def measure_total(self) -> float:
        """Total measure: 2*pi, 2 and 4*pi respectively."""
        return _MEASURES[self]


_MEASURES = {
    Manifold.CIRCLE: TWO_PI,
    Manifold.INTERVAL: 2.0,
    Manifold.SPHERE: 4.0 * math.pi,
}


@dataclass(eq=False)
class Grid:
    """Quadrature grid on one of the three domains.

    ``nodes`` holds angles for the circle, abscissae for the interval and
    (colatitude, azimuth) pairs for the sphere.  Weights are strictly
    positive and sum to the total measure of the domain.  ``max_degree`` is
    the largest basis degree the grid resolves exactly.
    """

    manifold: Manifold
    nodes: np.ndarray
    weights: np.ndarray
    max_degree: int
    _basis_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights <= 0.0):
            raise InputError("quadrature weights must be positive")
        total = self.manifold.measure_total
        if abs(float(self.weights.sum()) - total) > 1e-12 * total:
            raise InputError(
                f"weights sum {self.weights.sum()!r} does not match measure {total!r}"
            )
        if self.n_nodes < 2 * self.max_degree + 1:
            raise InputError("grid too coarse for its max_degree")

    @property
    def n_nodes(self) -> int:
        return int(self.weights.shape[0])

    def basis(self, max_degree: int | None = None) -> np.ndarray:
        """Orthonormal basis matrix (n_nodes, n_coeffs), cached per degree."""
        deg = self.max_degree if max_degree is None else int(max_degree)
        if deg > self.max_degree:
            raise InputError(f"degree {deg} exceeds grid max_degree {self.max_degree}")
        if deg not in self._basis_cache:
            self._basis_cache[deg] = basis_matrix(self.manifold, self.nodes, deg)
        return self._basis_cache[deg]


def circle_grid(bandwidth: int, oversample: int = 4) -> Grid:
    """Uniform grid on [-pi, pi) resolving trigonometric degree ``bandwidth``."""
    if bandwidth < 0:
        raise InputError("bandwidth must be nonnegative")
    m = max(2 * bandwidth + 1, oversample * max(bandwidth, 1), 8)
    angles = -math.pi + TWO_PI * np.arange(m) / m
    weights = np.full(m, TWO_PI / m)
    return Grid(Manifold.CIRCLE, angles, weights, bandwidth)


def interval_grid(degree: int, oversample: int = 2) -> Grid:
    """Gauss-Legendre grid on (-1, 1) resolving polynomial degree ``degree``."""
    if degree < 0:
        raise InputError("degree must be nonnegative")
    m = max(oversample * (degree + 1), degree + 1, 4)
    x, w = np.polynomial.legendre.leggauss(m)
    return Grid(Manifold.INTERVAL, x, w, degree)


def sphere_grid(degree: int, oversample: int = 1) -> Grid:
    """Gauss-Legendre x equispaced-azimuth product grid on S^2.

    Colatitudes are placed at Gauss-Legendre nodes in t = cos(theta) and the
    azimuth is sampled uniformly, so products of spherical harmonics up to
    degree ``degree`` integrate exactly.
    """
    if degree < 0:
        raise InputError("degree must be nonnegative")
    n_t = max(oversample * (degree + 1), degree + 1)
    n_phi = max(2 * oversample * degree + 2, 2 * degree + 2, 4)
    t, wt = np.polynomial.legendre.leggauss(n_t)
    theta = np.arccos(t)
    phi = TWO_PI * np.arange(n_phi) / n_phi
    th_flat = np.repeat(theta, n_phi)
    ph_flat = np.tile(phi, n_t)
    weights = np.repeat(wt * TWO_PI / n_phi, n_phi)
    nodes = np.column_stack([th_flat, ph_flat])
    return Grid(Manifold.SPHERE, nodes, weights, degree)


# ---------------------------------------------------------------------------
# basis evaluation


def _circle_basis(angles: np.ndarray, max_degree: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(angles, dtype=float))
    cols = [np.full(x.shape, 1.0 / math.sqrt(TWO_PI))]
    if max_degree > 0:
        n = np.arange(1, max_degree + 1)
        arg = np.outer(x, n)
        cols.append(np.cos(arg) / math.sqrt(math.pi))
        cols.append(np.sin(arg) / math.sqrt(math.pi))
    return np.column_stack(cols) if len(cols) > 1 else cols[0][:, None]


def legendre_recurrence(max_degree: int, x: np.ndarray) -> np.ndarray:
    """All Legendre polynomials P_0..P_max evaluated at x, shape (max+1, ...).

    Three-term recurrence; stable for real arguments and on the Bernstein
    ellipses used here.  Accepts complex input.
    """
    x = np.asarray(x)
    out = np.empty((max_degree + 1,) + x.shape, dtype=x.dtype)
    out[0] = np.ones_like(x)
    if max_degree >= 1:
        out[1] = x
    for j in range(1, max_degree):
        out[j + 1] = ((2 * j + 1) * x * out[j] - j * out[j - 1]) / (j + 1)
    return out


def _interval_basis(x: np.ndarray, max_degree: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = legendre_recurrence(max_degree, x)
    scale = np.sqrt(np.arange(max_degree + 1) + 0.5)
    return (p * scale[:, None]).T


def _sphere_basis(nodes: np.ndarray, max_degree: int) -> np.ndarray:
    """Real orthonormal spherical harmonics, flat index l*l + l + k."""
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    theta, phi = nodes[:, 0], nodes[:, 1]
    ct = np.cos(theta)
    n = nodes.shape[0]
    out = np.empty((n, (max_degree + 1) ** 2))
    sqrt2 = math.sqrt(2.0)
    for ell in range(max_degree + 1):
        base = ell * ell + ell
        for k in range(ell + 1):
            norm = math.sqrt((2 * ell + 1) / (4.0 * math.pi)) * math.exp(
                0.5 * (gammaln(ell - k + 1) - gammaln(ell + k + 1))
            )
            plk = lpmv(k, ell, ct) * norm
            if k == 0:
                out[:, base] = plk
            else:
                out[:, base + k] = sqrt2 * plk * np.cos(k * phi)
                out[:, base - k] = sqrt2 * plk * np.sin(k * phi)
    return out


def basis_matrix(manifold: Manifold, nodes: np.ndarray, max_degree: int) -> np.ndarray:
    if manifold is Manifold.CIRCLE:
        return _circle_basis(nodes, max_degree)
    if manifold is Manifold.INTERVAL:
        return _interval_basis(nodes, max_degree)
    return _sphere_basis(nodes, max_degree)


def coeff_count(manifold: Manifold, max_degree: int) -> int:
    if manifold is Manifold.CIRCLE:
        return 2 * max_degree + 1
    if manifold is Manifold.INTERVAL:
        return max_degree + 1
    return (max_degree + 1) ** 2


def coeff_degrees(manifold: Manifold, max_degree: int) -> np.ndarray:
    """Degree (|n|, polynomial degree or harmonic degree l) of each coefficient."""
    if manifold is Manifold.CIRCLE:
        n = np.arange(1, max_degree + 1)
        return np.concatenate([[0], n, n])
    if manifold is Manifold.INTERVAL:
        return np.arange(max_degree + 1)
    return np.repeat(np.arange(max_degree + 1), 2 * np.arange(max_degree + 1) + 1)


def bandwidth_from_count(manifold: Manifold, n_coeffs: int) -> int:
    if manifold is Manifold.CIRCLE:
        if n_coeffs % 2 != 1:
            raise InputError("circle coefficient vectors have odd length")
        return (n_coeffs - 1) // 2
    if manifold is Manifold.INTERVAL:
        return n_coeffs - 1
    deg = int(round(math.sqrt(n_coeffs))) - 1
    if (deg + 1) ** 2 != n_coeffs:
        raise InputError("sphere coefficient vectors have square length")
    return deg


@dataclass(eq=False)
class SpectralFunction:
    """Band-limited function stored as orthonormal-basis coefficients."""

    grid: Grid
    coeffs: np.ndarray
    _values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if not np.all(np.isfinite(self.coeffs)):
            raise InputError("coefficients must be finite")
        band = bandwidth_from_count(self.grid.manifold, self.coeffs.shape[0])
        if band > self.grid.max_degree:
            raise InputError("coefficient bandwidth exceeds grid resolution")

    @property
    def manifold(self) -> Manifold:
        return self.grid.manifold

    @property
    def bandwidth(self) -> int:
        return bandwidth_from_count(self.grid.manifold, self.coeffs.shape[0])

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = self.grid.basis(self.bandwidth) @ self.coeffs
        return self._values

    def degrees(self) -> np.ndarray:
        return coeff_degrees(self.manifold, self.bandwidth)

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def l1_norm(self) -> float:
        return float(np.sum(self.grid.weights * np.abs(self.values)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.coeffs.size else 0.0

    def fourier_coefficients(self) -> np.ndarray:
        """Complex coefficients g_hat(n) of g(x) = sum_n g_hat(n) e^{inx}.

        Returned array has length 2N+1 and index N+n for mode n, so that
        g_hat(-n) = conj(g_hat(n)) for the real functions stored here.
        """
        if self.manifold is not Manifold.CIRCLE:
            raise InputError("fourier_coefficients only defined on the circle")
        n = self.bandwidth
        fc = np.zeros(2 * n + 1, dtype=complex)
        fc[n] = self.coeffs[0] / math.sqrt(TWO_PI)
        if n > 0:
            a = self.coeffs[1 : n + 1]
            b = self.coeffs[n + 1 :]
            fc[n + 1 :] = (a - 1j * b) / (2.0 * math.sqrt(math.pi))
            fc[:n] = ((a + 1j * b) / (2.0 * math.sqrt(math.pi)))[::-1]
        return fc


def from_fourier_coefficients(grid: Grid, fc: np.ndarray) -> SpectralFunction:
    """Inverse of :meth:`SpectralFunction.fourier_coefficients` (circle only)."""
    fc = np.asarray(fc, dtype=complex)
    n = (fc.shape[0] - 1) // 2
    herm = fc[: n][::-1] - np.conj(fc[n + 1 :])
    if np.max(np.abs(herm), initial=0.0) > 1e-10 * (1.0 + np.max(np.abs(fc))):
        raise InputError("coefficients are not Hermitian, function would be complex")
    coeffs = np.empty(2 * n + 1)
    coeffs[0] = fc[n].real * math.sqrt(TWO_PI)
    if n > 0:
        coeffs[1 : n + 1] = 2.0 * math.sqrt(math.pi) * fc[n + 1 :].real
        coeffs[n + 1 :] = -2.0 * math.sqrt(math.pi) * fc[n + 1 :].imag
    return SpectralFunction(grid, coeffs)


def analyze(values: np.ndarray, grid: Grid, max_degree: int | None = None) -> SpectralFunction:
    """Expand nodal values in the orthonormal basis via grid quadrature."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_nodes,):
        raise InputError(
            f"expected {grid.n_nodes} nodal values, got shape {values.shape}"
        )
    basis = grid.basis(max_degree)
    coeffs = basis.T @ (grid.weights * values)
    return SpectralFunction(grid, coeffs)


def synthesize(f: SpectralFunction) -> np.ndarray:
    """Evaluate the basis expansion at the grid nodes."""
    return f.values


def synth_at(f: SpectralFunction, points: np.ndarray) -> np.ndarray:
    """Evaluate the expansion at arbitrary points (same layout as grid nodes)."""
    basis = basis_matrix(f.manifold, points, f.bandwidth)
    return basis @ f.coeffs


def project(f: SpectralFunction, m: int) -> SpectralFunction:
    """L2-orthogonal projection onto degrees <= m (coefficient truncation)."""
    if m < 0:
        raise InputError("projection degree must be nonnegative")
    coeffs = f.coeffs.copy()
    coeffs[f.degrees() > m] = 0.0
    return SpectralFunction(f.grid, coeffs)


def kernel_sup_bound(manifold: Manifold, m: int) -> float:
    """Sup of the degree-m projection kernel, the L1 -> Linf operator norm."""
    if m < 0:
        raise InputError("m must be nonnegative")
    if manifold is Manifold.CIRCLE:
        return (2 * m + 1) / TWO_PI
    if manifold is Manifold.INTERVAL:
        return (m + 1) ** 2 / 2.0
    return (m + 1) ** 2 / (4.0 * math.pi)


def legendre_eval(m: int, z):
    """P_m(z) by three-term recurrence; accepts real or complex arrays."""
    if m < 0:
        raise InputError("m must be nonnegative")
    z = np.asarray(z)
    return legendre_recurrence(m, z)[m]


def sphere_to_cart(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def cart_to_sphere(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1, keepdims=True)
    u = v / r
    theta = np.arccos(np.clip(u[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(u[..., 1], u[..., 0]), TWO_PI)
    return np.stack([theta, phi], axis=-1)


def addition_formula_kernel(m: int, x: np.ndarray, y: np.ndarray) -> float:
    """Reproducing kernel of the degree-m harmonic space, (2m+1)/(4pi) P_m(<x,y>)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dot = float(np.dot(x, y) / (np.linalg.norm(x) * np.linalg.norm(y)))
    return (2 * m + 1) / (4.0 * math.pi) * float(legendre_eval(m, np.clip(dot, -1.0, 1.0)))


def _orthogonal_frame(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([0.0, 0.0, 1.0]) if abs(x[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(helper, x)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(x, e1)
    return e1, e2


def average_operator(
    g: SpectralFunction, x: np.ndarray, t: float, n_quad: int | None = None
) -> float:
    """Average of g over the circle {y in S^2 : <y, x> = t}.

    For a pure degree-m harmonic g_m this reproduces P_m(t) * g_m(x); at
    t = +-1 it returns the point values g(+-x).
    """
    if g.manifold is not Manifold.SPHERE:
        raise InputError("average_operator is defined on the sphere")
    if abs(t) > 1.0:
        raise InputError("latitude parameter t must lie in [-1, 1]")
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)
    if t == 1.0 or t == -1.0:
        pts = cart_to_sphere(t * x)
        return float(synth_at(g, pts[None, :])[0])
    if n_quad is None:
        n_quad = max(4 * g.bandwidth + 8, 32)
    e1, e2 = _orthogonal_frame(x)
    s = TWO_PI * np.arange(n_quad) / n_quad
    rad = math.sqrt(1.0 - t * t)
    pts = t * x[None, :] + rad * (np.outer(np.cos(s), e1) + np.outer(np.sin(s), e2))
    vals = synth_at(g, cart_to_sphere(pts))
    return float(np.mean(vals))


def sphere_degree_values(f: SpectralFunction) -> np.ndarray:
    """Nodal values of each degree component Q_l f, shape (n_nodes, L+1)."""
    if f.manifold is not Manifold.SPHERE:
        raise InputError("degree components are defined on the sphere")
    basis = f.grid.basis(f.bandwidth)
    degs = f.degrees()
    big_l = f.bandwidth
    out = np.empty((f.grid.n_nodes, big_l + 1))
    for ell in range(big_l + 1):
        sel = degs == ell
        out[:, ell] = basis[:, sel] @ f.coeffs[sel]
    return out
