"""Impulsive noise instances under the two-parameter (epsilon, eta) budget.

An instance carries large impulses on a corrupted region of measure at most
eta and a smooth perturbation elsewhere whose quadrature L1 norm stays below
epsilon.  Both measured quantities are recorded exactly as computed on the
grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .spectral import Grid, Manifold, SpectralFunction, sphere_to_cart

TWO_PI = 2.0 * math.pi


@dataclass(eq=False)
class NoiseInstance:
    xi: np.ndarray
    corrupt_mask: np.ndarray
    epsilon_measured: float
    eta_measured: float
    amplitude: float
    seed: int
    grid: Grid


def measure(xi: np.ndarray, mask: np.ndarray, grid: Grid) -> tuple[float, float]:
    """Quadrature L1 norm off the mask and quadrature measure of the mask."""
    xi = np.asarray(xi, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if xi.shape != (grid.n_nodes,) or mask.shape != (grid.n_nodes,):
        raise InputError("xi and mask must match the grid node count")
    eps = float(np.sum(grid.weights[~mask] * np.abs(xi[~mask])))
    eta = float(np.sum(grid.weights[mask]))
    return eps, eta


def _distance_from_center(grid: Grid, rng: np.random.Generator) -> np.ndarray:
    if grid.manifold is Manifold.CIRCLE:
        center = rng.uniform(-math.pi, math.pi)
        d = np.abs(grid.nodes - center)
        return np.minimum(d, TWO_PI - d)
    if grid.manifold is Manifold.INTERVAL:
        center = rng.uniform(-1.0, 1.0)
        return np.abs(grid.nodes - center)
    center = rng.normal(size=3)
    center /= np.linalg.norm(center)
    xyz = sphere_to_cart(grid.nodes[:, 0], grid.nodes[:, 1])
    return np.arccos(np.clip(xyz @ center, -1.0, 1.0))


def _smooth_field(grid: Grid, rng: np.random.Generator) -> np.ndarray:
    """Low-order random expansion used for the small off-mask perturbation."""
    deg = min(3, grid.max_degree)
    from .spectral import coeff_count

    n = coeff_count(grid.manifold, deg)
    coeffs = rng.uniform(-1.0, 1.0, size=n)
    return SpectralFunction(grid, coeffs).values


def make_impulsive(
    grid: Grid,
    eta: float,
    epsilon: float,
    amplitude: float,
    seed: int,
    contiguous: bool = True,
) -> NoiseInstance:
    """Build a noise instance meeting the (epsilon, eta) budget on a grid.

    The corrupted region is one arc (circle, interval) or cap (sphere) placed
    at a seeded center; nodes join it greedily while the cumulative quadrature
    weight stays within eta.  ``contiguous=False`` scatters the corrupted
    nodes instead, for robustness studies.
    """
    if eta < 0 or epsilon < 0:
        raise InputError("noise budgets must be nonnegative")
    if amplitude < 0:
        raise InputError("amplitude must be nonnegative")
    if eta >= grid.manifold.measure_total:
        raise InputError("eta must be smaller than the total measure")
    rng = np.random.default_rng(seed)

    mask = np.zeros(grid.n_nodes, dtype=bool)
    if eta > 0:
        dist = _distance_from_center(grid, rng)
        order = np.argsort(dist, kind="stable") if contiguous else rng.permutation(grid.n_nodes)
        budget = 0.0
        for i in order:
            w = grid.weights[i]
            if budget + w > eta:
                if contiguous:
                    break
                continue
            mask[i] = True
            budget += w

    xi = np.zeros(grid.n_nodes)
    n_corrupt = int(mask.sum())
    if n_corrupt:
        xi[mask] = amplitude * rng.choice([-1.0, 1.0], size=n_corrupt)

    if epsilon > 0:
        smooth = _smooth_field(grid, rng)
        off = ~mask
        raw = float(np.sum(grid.weights[off] * np.abs(smooth[off])))
        if raw > 0:
            xi[off] = smooth[off] * (epsilon * (1.0 - 1e-12) / raw)

    eps_m, eta_m = measure(xi, mask, grid)
    return NoiseInstance(
        xi=xi,
        corrupt_mask=mask,
        epsilon_measured=eps_m,
        eta_measured=eta_m,
        amplitude=amplitude,
        seed=seed,
        grid=grid,
    )
