"""Incompressible, Lipschitz-in-space velocity fields on the torus.

Every flow kind is divergence-free by construction (shears depend only on
transverse coordinates; cellular flows come from a stream function).
Time-switched flows use closed-left intervals so runs are reproducible at
the switching instants.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .rng import counter_uniform
from .spectral import (
    Grid,
    ScalarField,
    SpectralCoeffs,
    spectral_divergence,
    spectral_gradient,
    to_physical,
    to_spectral,
)

__all__ = [
    "FlowSpec",
    "ZeroFlow",
    "AlternatingShear",
    "CellularFlow",
    "MultiscaleMixer",
    "MollifiedFlow",
    "ScaledFlow",
    "make_shear_alternating",
    "make_cellular",
    "make_multiscale_mixer",
    "mollify",
    "scale_amplitude",
    "evaluate",
    "sample_on_grid",
    "lipschitz_seminorm",
    "divergence_residual",
    "max_speed",
]

_TWO_PI = 2.0 * np.pi


def grid_mesh(grid: Grid) -> np.ndarray:
    """Torus coordinates of all grid points, shape (*grid.shape, dim)."""
    axes = grid.coords()
    full = [np.broadcast_to(a, grid.shape) for a in axes]
    return np.stack(full, axis=-1)


class FlowSpec:
    """Base class: immutable velocity-field description."""

    dim: int = 2
    lipschitz_bound: float = 0.0  # declared bound on sup |grad u|

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        """Velocity at points x (shape (..., dim)) and time t."""
        raise NotImplementedError

    @property
    def duration(self) -> float | None:
        """Total schedule length, or None for flows defined for all t."""
        return None

    def sample_on_grid(self, grid: Grid, t: float) -> np.ndarray:
        return self.velocity(grid_mesh(grid), t)


@dataclass(frozen=True)
class ZeroFlow(FlowSpec):
    dim: int = 2
    lipschitz_bound: float = 0.0

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.zeros_like(x)


@dataclass(frozen=True)
class AlternatingShear(FlowSpec):
    """Sine shears switching direction every t_switch (closed-left intervals).

    Interval j even: u = (sin(2*pi*m*y + theta_j), 0); odd: the transpose.
    In 3D the sheared/transverse axis pair cycles through all three axes.
    Phases come from a counter-based generator, so the schedule is
    deterministic for any interval index.
    """

    m: int = 1
    t_switch: float = 0.1
    phase_seed: int = 0
    dim: int = 2

    def __post_init__(self) -> None:
        if self.m < 1 or self.t_switch <= 0:
            raise ValueError("need m >= 1 and t_switch > 0")
        object.__setattr__(self, "lipschitz_bound", _TWO_PI * self.m)

    def _phase(self, j: int) -> float:
        return float(_TWO_PI * counter_uniform(self.phase_seed, j))

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        j = int(np.floor(t / self.t_switch))
        out = np.zeros_like(x)
        if self.dim == 2:
            axis = j % 2  # velocity component
            transverse = 1 - axis
        else:
            axis = j % 3
            transverse = (axis + 1) % 3
        out[..., axis] = np.sin(
            _TWO_PI * self.m * x[..., transverse] + self._phase(j)
        )
        return out


@dataclass(frozen=True)
class CellularFlow(FlowSpec):
    """2D stream-function cells, u = (d_y psi, -d_x psi), normalized so
    sup |grad u| = 2*pi independently of the cell count m."""

    m: int = 1
    dim: int = 2

    def __post_init__(self) -> None:
        if self.dim != 2:
            raise ValueError("cellular flow is 2D only")
        if self.m < 1:
            raise ValueError("need m >= 1")
        object.__setattr__(self, "lipschitz_bound", _TWO_PI)

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        a = _TWO_PI * self.m
        s = 1.0 / self.m
        out = np.empty_like(x)
        out[..., 0] = s * np.sin(a * x[..., 0]) * np.cos(a * x[..., 1])
        out[..., 1] = -s * np.cos(a * x[..., 0]) * np.sin(a * x[..., 1])
        return out


@dataclass(frozen=True)
class MultiscaleMixer(FlowSpec):
    """Dyadic cascade of blinking cellular stages (2D).

    Stage n (1-based) lasts per_level_time and holds a 2^n x 2^n grid of
    counter-rotating cells aligned with the dyadic squares, normalized to
    sup |grad u| = 1. Each stage consists of `cycles` sub-cycles: a
    rotation phase followed by a constant diagonal translation by a
    quarter period (half a cell per coordinate), which exchanges mass
    between adjacent cells; the shift direction alternates with the
    level. Repeating the rotate/shift pair is what makes the stage mix
    chaotically rather than just stir closed streamlines.

    The default per_level_time gives each rotation phase approximately a
    half turn near the cell centers (angular rate 1 there under the
    unit-Lipschitz normalization, so a half turn costs pi time units at
    every level).
    """

    levels: int = 4
    per_level_time: float = 13.4
    cycles: int = 4
    shift_frac: float = 0.06
    repeats: int = 1
    dim: int = 2

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise ValueError("need levels >= 1")
        if self.per_level_time <= 0 or self.cycles < 1:
            raise ValueError("invalid stage timing")
        if not 0 < self.shift_frac < 1:
            raise ValueError("shift_frac must lie in (0, 1)")
        if self.repeats < 1:
            raise ValueError("need repeats >= 1")
        object.__setattr__(self, "lipschitz_bound", 1.0)

    @property
    def duration(self) -> float:
        return self.levels * self.per_level_time * self.repeats

    def _stage(self, t: float) -> tuple[int, float] | None:
        if t < 0 or t >= self.duration:
            return None
        t = t % (self.levels * self.per_level_time)
        n = int(t // self.per_level_time) + 1
        return min(n, self.levels), t - (n - 1) * self.per_level_time

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        stage = self._stage(t)
        if stage is None:
            return np.zeros_like(x)
        n, local = stage
        sub = self.per_level_time / self.cycles
        local_c = local % sub
        t_shift = self.shift_frac * sub
        t_rot = sub - t_shift
        m = 2 ** (n - 1)  # sin(2*pi*m*.) has 2^n x 2^n sign cells
        out = np.empty_like(x)
        if local_c < t_rot:
            a = _TWO_PI * m
            s = 1.0 / a  # sup |grad u| = 1
            out[..., 0] = s * np.sin(a * x[..., 0]) * np.cos(a * x[..., 1])
            out[..., 1] = -s * np.cos(a * x[..., 0]) * np.sin(a * x[..., 1])
        else:
            shift = 2.0 ** -(n + 1)  # quarter period per coordinate
            speed = shift / t_shift
            out[..., 0] = speed
            out[..., 1] = speed if n % 2 == 1 else -speed
        return out


def _bump_transform(delta: float, grid: Grid) -> np.ndarray:
    """DFT of the unit-mass polynomial bump (1 - (r/delta)^2)^4 on the grid."""
    mesh = grid_mesh(grid)
    r2 = np.sum(mesh**2, axis=-1)
    prof = np.maximum(1.0 - r2 / delta**2, 0.0) ** 4
    prof /= prof.sum()
    return np.fft.fftn(prof)  # real-even profile -> symmetric transform


@dataclass(frozen=True)
class MollifiedFlow(FlowSpec):
    """Spectral convolution of the inner flow with a compact bump.

    The inner velocity is sampled on an internal grid, multiplied per mode
    by the bump transform, and interpolated off-grid with periodic cubic
    splines. The discrete kernel is nonnegative with unit mass, so grid
    values are convex combinations of inner values and the Lipschitz
    seminorm cannot increase.
    """

    inner: FlowSpec
    delta: float
    resolution: int = 256

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 0.25:
            raise ValueError("mollification radius must lie in (0, 1/4)")
        object.__setattr__(self, "dim", self.inner.dim)
        object.__setattr__(self, "lipschitz_bound", self.inner.lipschitz_bound)

    @property
    def duration(self) -> float | None:
        return self.inner.duration

    @functools.cache
    def _internal_grid(self) -> Grid:
        return Grid(dim=self.dim, n=self.resolution)

    @functools.lru_cache(maxsize=16)
    def _filtered(self, t: float) -> np.ndarray:
        g = self._internal_grid()
        u = self.inner.sample_on_grid(g, t)
        ghat = _bump_transform(self.delta, g)
        out = np.empty_like(u)
        for j in range(self.dim):
            out[..., j] = np.fft.ifftn(np.fft.fftn(u[..., j]) * ghat).real
        return out

    @functools.lru_cache(maxsize=16)
    def _spline(self, t: float) -> np.ndarray:
        u = self._filtered(t)
        out = np.empty_like(u)
        for j in range(self.dim):
            out[..., j] = ndimage.spline_filter(u[..., j], order=3, mode="grid-wrap")
        return out

    def sample_on_grid(self, grid: Grid, t: float) -> np.ndarray:
        if self.resolution % grid.n == 0:
            stride = self.resolution // grid.n
            u = self._filtered(t)
            sl = (slice(None, None, stride),) * self.dim
            return u[sl].copy()
        return self.velocity(grid_mesh(grid), t)

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        spline = self._spline(t)
        idx = np.mod(x, 1.0) * self.resolution
        flat = idx.reshape(-1, self.dim).T
        out = np.empty((flat.shape[1], self.dim))
        for j in range(self.dim):
            out[:, j] = ndimage.map_coordinates(
                spline[..., j], flat, order=3, mode="grid-wrap", prefilter=False
            )
        return out.reshape(x.shape)


@dataclass(frozen=True)
class ScaledFlow(FlowSpec):
    inner: FlowSpec
    amplitude: float

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        object.__setattr__(self, "dim", self.inner.dim)
        object.__setattr__(
            self, "lipschitz_bound", self.amplitude * self.inner.lipschitz_bound
        )

    @property
    def duration(self) -> float | None:
        return self.inner.duration

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        return self.amplitude * self.inner.velocity(x, t)

    def sample_on_grid(self, grid: Grid, t: float) -> np.ndarray:
        return self.amplitude * self.inner.sample_on_grid(grid, t)


def make_shear_alternating(
    m: int, t_switch: float, phase_seed: int, dim: int = 2
) -> AlternatingShear:
    return AlternatingShear(m=m, t_switch=t_switch, phase_seed=phase_seed, dim=dim)


def make_cellular(m: int, dim: int = 2) -> CellularFlow:
    return CellularFlow(m=m, dim=dim)


def make_multiscale_mixer(
    levels: int,
    per_level_time: float = 13.4,
    grid_n: int | None = None,
    repeats: int = 1,
    cycles: int = 4,
) -> MultiscaleMixer:
    if grid_n is not None and 2**levels > grid_n // 8:
        raise ValueError(
            f"levels={levels} leaves cells thinner than 8 points at n={grid_n}"
        )
    return MultiscaleMixer(
        levels=levels, per_level_time=per_level_time, repeats=repeats, cycles=cycles
    )


def mollify(flow: FlowSpec, delta: float, resolution: int = 256) -> MollifiedFlow:
    return MollifiedFlow(inner=flow, delta=delta, resolution=resolution)


def scale_amplitude(flow: FlowSpec, amplitude: float) -> ScaledFlow:
    if isinstance(flow, ScaledFlow):
        return ScaledFlow(inner=flow.inner, amplitude=flow.amplitude * amplitude)
    return ScaledFlow(inner=flow, amplitude=amplitude)


def evaluate(flow: FlowSpec, x, t: float) -> np.ndarray:
    """Velocity at a single torus point (wrapped); returns a dim-vector."""
    pt = np.mod(np.asarray(x, dtype=np.float64), 1.0)
    return flow.velocity(pt, t)


def sample_on_grid(flow: FlowSpec, grid: Grid, t: float) -> np.ndarray:
    return flow.sample_on_grid(grid, t)


def lipschitz_seminorm(flow: FlowSpec, t: float, grid: Grid) -> float:
    """Grid-sampled max entry of the velocity-gradient matrix (a lower
    bound of the true seminorm, spectral derivatives)."""
    u = flow.sample_on_grid(grid, t)
    worst = 0.0
    for j in range(grid.dim):
        comp = to_spectral(ScalarField(grid=grid, values=u[..., j]))
        for g in spectral_gradient(comp):
            worst = max(worst, float(np.abs(to_physical(g).values).max()))
    return worst


def divergence_residual(flow: FlowSpec, grid: Grid, t: float) -> float:
    u = flow.sample_on_grid(grid, t)
    comps = [to_spectral(ScalarField(grid=grid, values=u[..., j])) for j in range(grid.dim)]
    div = to_physical(spectral_divergence(comps))
    return float(np.abs(div.values).max())


def max_speed(flow: FlowSpec, grid: Grid, t: float) -> float:
    u = flow.sample_on_grid(grid, t)
    return float(np.sqrt(np.sum(u**2, axis=-1)).max())
