"""Initial densities, cutoff functions, and reproducible random fields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import counter_normal_pair
from .spectral import Grid, ScalarField, SpectralCoeffs, to_physical, wavevectors
from .flows import grid_mesh

__all__ = [
    "BlowupRecipe",
    "gaussian_bump",
    "radial_cutoff",
    "random_smooth_field",
    "blowup_parameters",
]


@dataclass(frozen=True)
class BlowupRecipe:
    """Parameter choices of the finite-time blow-up construction.

    The constants c1..c4 are user-supplied estimates of the universal
    constants in the mass-retention and second-moment lemmas; they are
    never pinned by theory, so defaults of 1.0 are non-authoritative.
    """

    mass: float
    radius: float  # concentration scale a
    cutoff_scale: float  # b, with 2a < b <= 1/4
    tau: float  # contradiction time 100 a^2 / M
    c1: float
    c2: float
    c3: float
    c4: float

    def __post_init__(self) -> None:
        if not (0 < 2 * self.radius < self.cutoff_scale <= 0.25):
            raise ValueError("recipe requires 0 < 2a < b <= 1/4")
        if self.mass <= 1:
            raise ValueError("recipe requires M > 1")
        if abs(self.tau - 100.0 * self.radius**2 / self.mass) > 1e-12 * self.tau:
            raise ValueError("tau must equal 100 a^2 / M")


def blowup_parameters(c1: float, c2: float, c3: float, c4: float) -> BlowupRecipe:
    """Parameter recipe: b caps the cutoff scale against c3, M dominates c4,
    a is the smallest of three cutoff-relative bounds, tau = 100 a^2 / M."""
    if min(c1, c2, c3, c4) <= 0:
        raise ValueError("constants must be positive")
    b = min(0.25, 0.001 / c3)
    mass = max(1000.0 * c4, 1.0 + 1e-9)
    a = min(b / 2.0, b / (10.0 * np.sqrt(2.0 * c1)), b / (100.0 * np.sqrt(c2)))
    tau = 100.0 * a**2 / mass
    return BlowupRecipe(
        mass=mass, radius=a, cutoff_scale=b, tau=tau, c1=c1, c2=c2, c3=c3, c4=c4
    )


def _centered_radii(grid: Grid, center) -> np.ndarray:
    mesh = grid_mesh(grid)
    center = np.asarray(center, dtype=np.float64)
    # nearest periodic image
    d = mesh - center
    d -= np.round(d)
    return np.sqrt(np.sum(d**2, axis=-1))


def gaussian_bump(grid: Grid, mass: float, a: float, center=None) -> ScalarField:
    """Periodized Gaussian of width a, rescaled so the grid quadrature mass
    is exactly `mass`. Strictly positive."""
    if mass <= 0:
        raise ValueError("mass must be positive")
    if not 0 < a < 0.25:
        raise ValueError("width a must lie in (0, 1/4)")
    if a < 3 * grid.spacing:
        raise ValueError(f"width a={a} below 3 grid spacings (unresolvable)")
    if center is None:
        center = (0.0,) * grid.dim
    mesh = grid_mesh(grid)
    center_arr = np.asarray(center, dtype=np.float64)
    vals = np.zeros(grid.shape)
    # three periodic images per axis cover the tails to well below epsilon
    shifts = np.array([-1.0, 0.0, 1.0])
    grids = np.meshgrid(*([shifts] * grid.dim), indexing="ij")
    for offset in zip(*(g.ravel() for g in grids)):
        d = mesh - center_arr - np.asarray(offset)
        vals += np.exp(-np.sum(d**2, axis=-1) / (2.0 * a**2))
    vals *= mass / vals.mean()  # quadrature mass = mean on the unit-volume torus
    return ScalarField(grid=grid, values=vals)


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """C-infinity transition from 1 at t<=0 to 0 at t>=1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        h0 = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
        h1 = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    return h0 / (h0 + h1)


def radial_cutoff(grid: Grid, b: float) -> ScalarField:
    """Smooth radial cutoff: 1 on the ball of radius b, 0 outside radius 2b,
    values in [0, 1], grid-max gradient <= 4/b."""
    if not 0 < b <= 0.25:
        raise ValueError("cutoff scale b must lie in (0, 1/4]")
    if b < 4 * grid.spacing:
        raise ValueError(f"cutoff scale b={b} below 4 grid spacings")
    r = _centered_radii(grid, (0.0,) * grid.dim)
    vals = _smoothstep((r - b) / b)
    return ScalarField(grid=grid, values=vals)


def random_smooth_field(grid: Grid, seed: int, decay: float) -> ScalarField:
    """Mean-zero field with coefficients z(k) / |k|^decay for |k| <= n/3.

    z(k) are standard complex Gaussians from a counter-based generator
    keyed by (seed, k), then conjugate-symmetrized, so the same (seed,
    grid, decay) always gives the identical field.
    """
    if decay <= grid.dim / 2 + 1:
        raise ValueError(f"decay={decay} too small for a smooth field")
    comps, k2 = wavevectors(grid)
    kfull = [np.broadcast_to(c, grid.shape).astype(np.int64) for c in comps]
    limit = grid.n / 3.0
    mask = (k2 > 0) & (k2 <= limit * limit)
    re, im = counter_normal_pair(np.int64(seed), *kfull)
    z = re + 1j * im
    with np.errstate(divide="ignore"):
        amp = np.where(mask, k2 ** (-decay / 2.0), 0.0)
    raw = z * amp
    # symmetrize: c(k) <- (raw(k) + conj(raw(-k))) / 2
    rev = raw
    for ax in range(grid.dim):
        rev = np.flip(np.roll(rev, -1, axis=ax), axis=ax)
    coeffs = 0.5 * (raw + np.conj(rev))
    coeffs[(0,) * grid.dim] = 0.0
    return to_physical(SpectralCoeffs(grid=grid, coeffs=coeffs))
