"""Monitored functionals, thresholds, residuals, and the blow-up detector.

Universal constants that the theory leaves unpinned (C0..C4 and friends)
are user-configurable inputs with default 1 (10 for the sup-norm bound
constant); they are reported in outputs and never silently asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .flows import grid_mesh
from .solver import SimState
from .spectral import (
    Grid,
    NormConvention,
    ScalarField,
    SpectralCoeffs,
    invert_laplacian,
    laplacian,
    lp_norm,
    project_low_modes,
    sobolev_norm_of_coeffs,
    to_physical,
    to_spectral,
    wavevectors,
)

__all__ = [
    "DiagnosticsRecord",
    "ThresholdParams",
    "MixingReport",
    "DetectorConfig",
    "DetectorVerdict",
    "MoserReport",
    "GN14",
    "NASH16",
    "GN66",
    "record",
    "b1_threshold",
    "safe_window",
    "decay_residual",
    "second_moment_rate",
    "cell_mixedness",
    "duality_bound_check",
    "inequality_ratios",
    "linf_bound_check",
    "blowup_detect",
    "moser_linf_iterate",
]

CSV_COLUMNS = (
    "t",
    "mass",
    "l2_dev",
    "h1",
    "h1_paper",
    "hm1",
    "linf_dev",
    "min_val",
    "pn_low",
    "criterion_integral",
    "dt_used",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    l2_dev: float
    h1: float  # PHYSICAL convention (matches int |grad rho|^2)
    h1_paper: float
    hm1: float  # PAPER convention
    linf_dev: float
    min_val: float
    pn_low: float
    criterion_integral: float
    dt_used: float
    tail_frac: float = 0.0  # deviation energy above |k| = n/3; not serialized

    def row(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


@dataclass(frozen=True)
class ThresholdParams:
    b: float
    rho_bar: float
    c0: float = 1.0
    c1: float = 1.0
    d: int = 2

    def __post_init__(self) -> None:
        if self.b <= 0 or self.rho_bar < 0 or self.c0 <= 0 or self.c1 <= 0:
            raise ValueError("threshold parameters must be positive")
        if self.d not in (2, 3):
            raise ValueError("d must be 2 or 3")


@dataclass(frozen=True)
class MixingReport:
    level: int
    cell_averages: np.ndarray = field(repr=False)
    mixedness: float
    hm1: float


@dataclass(frozen=True)
class DetectorConfig:
    criterion_cap: float = 1e4
    h1_cap: float = 1e6
    tail_cap: float = 0.1
    neg_cap: float = 1e-3


@dataclass(frozen=True)
class DetectorVerdict:
    fired: bool
    clause: str | None = None

    def __bool__(self) -> bool:
        return self.fired


@dataclass(frozen=True)
class MoserReport:
    norms: list[float]  # ||rho - mean||_{L^{2^j}}, j = 1..levels
    caps: list[float]  # recursion-predicted upper bounds


def _deviation_coeffs(state: SimState) -> SpectralCoeffs:
    c = state.rho_hat.coeffs.copy()
    c[(0,) * state.grid.dim] = 0.0
    return SpectralCoeffs(grid=state.grid, coeffs=c)


def record(state: SimState, N: int, dt_used: float = 0.0) -> DiagnosticsRecord:
    grid = state.grid
    dev = _deviation_coeffs(state)
    power = np.abs(dev.coeffs) ** 2
    _, k2 = wavevectors(grid)
    total = float(power.sum())
    tail = float(power[k2 > (grid.n / 3.0) ** 2].sum())
    l2_dev = float(np.sqrt(total))
    h1_paper = sobolev_norm_of_coeffs(dev, 1.0, NormConvention.PAPER)
    vals = state.rho.values
    mass = float(state.rho_hat.coeffs[(0,) * grid.dim].real)
    return DiagnosticsRecord(
        t=state.t,
        mass=mass,
        l2_dev=l2_dev,
        h1=2.0 * np.pi * h1_paper,
        h1_paper=h1_paper,
        hm1=sobolev_norm_of_coeffs(dev, -1.0, NormConvention.PAPER),
        linf_dev=float(np.abs(vals - state.mean).max()),
        min_val=float(vals.min()),
        pn_low=float(
            np.sqrt(np.sum(np.abs(project_low_modes(dev, N).coeffs) ** 2))
        ),
        criterion_integral=state.criterion_integral,
        dt_used=dt_used,
        tail_frac=tail / total if total > 0 else 0.0,
    )


def b1_threshold(p: ThresholdParams) -> float:
    """Gradient-norm level above which the L2 deviation must decay."""
    expo = (12.0 - 2.0 * p.d) / (4.0 - p.d)
    return float(np.sqrt(p.c0 * p.b**expo + 2.0 * p.rho_bar * p.b**2))


def safe_window(p: ThresholdParams) -> float:
    """Time over which the L2 deviation provably at most doubles."""
    expo = 4.0 / (4.0 - p.d)
    inv_rho = np.inf if p.rho_bar == 0 else 1.0 / p.rho_bar
    return float(p.c1 * min(1.0, inv_rho, p.b ** (-expo)))


def decay_residual(
    state_pair: tuple[SimState, SimState], p: ThresholdParams
) -> tuple[float, float]:
    """Residual of the L2-decay differential inequality between two nearby
    states, and the implied estimate of its universal constant."""
    s0, s1 = state_pair
    dt = s1.t - s0.t
    r0 = record(s0, 1)
    r1 = record(s1, 1)
    if dt <= 0:
        raise ValueError("states must be time-ordered")
    ddt = (r1.l2_dev**2 - r0.l2_dev**2) / dt
    l2 = 0.5 * (r0.l2_dev + r1.l2_dev)
    h1 = 0.5 * (r0.h1 + r1.h1)
    residual = ddt + h1**2 - 2.0 * p.rho_bar * l2**2
    expo = (12.0 - 2.0 * p.d) / (4.0 - p.d)
    c0_estimate = residual / l2**expo if l2 > 1e-12 else 0.0
    return float(residual), float(c0_estimate)


def second_moment_rate(
    rho: ScalarField, phi: ScalarField, rho_bar: float
) -> tuple[float, float]:
    """Exact time derivative of int |x|^2 rho phi under the zero-flow
    dynamics, plus the leading attraction term -(1/2 pi)(int rho phi)^2."""
    grid = rho.grid
    if grid.dim != 2:
        raise ValueError("second-moment functional is 2D only")
    if phi.grid != grid:
        raise ValueError("cutoff grid mismatch")
    rho_hat = to_spectral(rho)
    lap = to_physical(laplacian(rho_hat)).values
    comps, _ = wavevectors(grid)
    c_hat = invert_laplacian(rho_hat).coeffs
    flux_div = np.zeros(grid.shape)
    for kj in comps:
        drift = np.fft.ifftn(2j * np.pi * kj * c_hat).real * grid.npoints
        flux_div += (
            np.fft.ifftn(2j * np.pi * kj * np.fft.fftn(rho.values * drift)).real
        )
    rhs = lap - flux_div
    mesh = grid_mesh(grid)
    x2 = np.sum(mesh**2, axis=-1)  # fundamental-domain representative
    rate = float(np.mean(x2 * phi.values * rhs))
    m_phi = float(np.mean(rho.values * phi.values))
    leading = -(m_phi**2) / (2.0 * np.pi)
    return rate, leading


def cell_mixedness(f: ScalarField, n_level: int) -> MixingReport:
    """Averages over the dyadic squares at scale 2^-n_level, and the
    deviation-form mixedness max |avg - mean| / ||f - mean||_inf."""
    grid = f.grid
    if grid.dim != 2:
        raise ValueError("cell averages are 2D only")
    cells = 2**n_level
    if n_level < 1 or cells > grid.n // 4 or grid.n % cells != 0:
        raise ValueError(f"level {n_level} misaligned with n={grid.n}")
    block = grid.n // cells
    avgs = f.values.reshape(cells, block, cells, block).mean(axis=(1, 3))
    mean = f.mean()
    linf = float(np.abs(f.values - mean).max())
    mixed = float(np.abs(avgs - mean).max() / linf) if linf > 0 else 0.0
    dev = to_spectral(f)
    return MixingReport(
        level=n_level,
        cell_averages=avgs,
        mixedness=mixed,
        hm1=sobolev_norm_of_coeffs(dev, -1.0, NormConvention.PAPER),
    )


def duality_bound_check(
    f: ScalarField, n_level: int
) -> tuple[float, float, float]:
    """Mix-norm against the duality bound from small dyadic cell averages.

    Returns (hm1, eps_eff * ||f||_inf, their ratio); the ratio plays the
    role of the empirical duality constant.
    """
    if abs(f.mean()) > 1e-10 * (np.abs(f.values).max() + 1e-300):
        raise ValueError("duality bound check requires a mean-zero field")
    rep = cell_mixedness(f, n_level)
    linf = float(np.abs(f.values).max())
    eps_eff = max(2.0**-n_level, rep.mixedness)
    rhs = eps_eff * linf
    ratio = rep.hm1 / rhs if rhs > 0 else 0.0
    return rep.hm1, rhs, ratio


@dataclass(frozen=True)
class GN14:
    """Interpolation of a directional derivative between L2 and a higher
    homogeneous norm."""

    m: int
    p: float
    n_ord: int


@dataclass(frozen=True)
class NASH16:
    """Nash-type bound of one homogeneous norm by the next and L1."""

    s: float


@dataclass(frozen=True)
class GN66:
    """L^q bound by gradient-L2 and a weaker L^r norm, for sign-changing
    fields."""

    q: float
    r: float


def _lp(values: np.ndarray, p: float) -> float:
    if p == np.inf:
        return float(np.abs(values).max())
    return float(np.mean(np.abs(values) ** p) ** (1.0 / p))


def _require_mean_zero(f: ScalarField) -> None:
    if abs(f.mean()) > 1e-10 * (np.abs(f.values).max() + 1e-300):
        raise ValueError("inequality requires a mean-zero field")


def inequality_ratios(f: ScalarField, which) -> float:
    """Empirical constant LHS / (product of right-hand norms without C)."""
    grid = f.grid
    d = grid.dim
    if isinstance(which, GN14):
        m, p, n_ord = which.m, which.p, which.n_ord
        if not (0 <= m <= n_ord and n_ord >= 1):
            raise ValueError("need 0 <= m <= n_ord")
        if not 2 <= p:
            raise ValueError("need p >= 2")
        a = (m - d / p + d / 2.0) / n_ord if p != np.inf else (m + d / 2.0) / n_ord
        if not 0 <= a <= 1:
            raise ValueError(f"interpolation exponent a={a:g} outside [0, 1]")
        if a == 1 and p == np.inf:
            raise ValueError("excluded case: a=1 with p=infinity")
        _require_mean_zero(f)
        c = to_spectral(f)
        comps, _ = wavevectors(grid)
        lhs = 0.0
        for kj in comps:
            deriv = np.fft.ifftn((2j * np.pi * kj) ** m * c.coeffs).real * grid.npoints
            lhs = max(lhs, _lp(deriv, p))
        l2 = _lp(f.values, 2.0)
        hn = sobolev_norm_of_coeffs(c, float(n_ord), NormConvention.PAPER)
        denom = l2 ** (1 - a) * hn**a
        return lhs / denom if denom > 0 else 0.0
    if isinstance(which, NASH16):
        s = which.s
        if s < 0:
            raise ValueError("need s >= 0")
        _require_mean_zero(f)
        c = to_spectral(f)
        lhs = sobolev_norm_of_coeffs(c, s, NormConvention.PAPER)
        hs1 = sobolev_norm_of_coeffs(c, s + 1.0, NormConvention.PAPER)
        l1 = _lp(f.values, 1.0)
        expo = (2 * s + d) / (2 * s + 2 + d)
        denom = hs1**expo * l1 ** (1 - expo)
        return lhs / denom if denom > 0 else 0.0
    if isinstance(which, GN66):
        q, r = which.q, which.r
        if not (0 < r < q < np.inf):
            raise ValueError("need 0 < r < q < infinity")
        if 1.0 / d - 0.5 + 1.0 / r <= 0:
            raise ValueError("need 1/d - 1/2 + 1/r > 0")
        if not (f.values.min() <= 0.0 <= f.values.max()):
            raise ValueError("field must vanish somewhere (sign change required)")
        a = (1.0 / r - 1.0 / q) / (1.0 / d - 0.5 + 1.0 / r)
        c = to_spectral(f)
        # ||grad v||_L2 is the PHYSICAL homogeneous first norm
        grad = sobolev_norm_of_coeffs(c, 1.0, NormConvention.PHYSICAL)
        denom = grad**a * _lp(f.values, r) ** (1 - a)
        lhs = _lp(f.values, q)
        return lhs / denom if denom > 0 else 0.0
    raise TypeError(f"unknown inequality selector {which!r}")


def linf_bound_check(
    state: SimState, B: float, c4: float = 10.0
) -> tuple[float, float, bool]:
    """Sup-norm deviation against the c4 * B * max(B, sqrt(mean)) bound."""
    linf_dev = float(np.abs(state.rho.values - state.mean).max())
    bound = c4 * B * max(B, np.sqrt(max(state.mean, 0.0)))
    return linf_dev, bound, linf_dev <= bound


def blowup_detect(
    history: list[DiagnosticsRecord], cfg: DetectorConfig = DetectorConfig()
) -> DetectorVerdict:
    """Disjunction of the continuation-criterion cap, gradient-norm cap,
    spectral-tail (resolution exhaustion) cap, and negativity cap."""
    if len(history) < 2:
        raise ValueError("need at least two records")
    last = history[-1]
    if last.criterion_integral > cfg.criterion_cap:
        return DetectorVerdict(True, "criterion_integral")
    if last.h1 > cfg.h1_cap:
        return DetectorVerdict(True, "h1")
    if last.tail_frac > cfg.tail_cap:
        return DetectorVerdict(True, "spectral_tail")
    if last.min_val < -cfg.neg_cap * last.linf_dev:
        return DetectorVerdict(True, "negativity")
    return DetectorVerdict(False)


def moser_linf_iterate(state: SimState, levels: int = 6) -> MoserReport:
    """Dyadic L^p ladder toward the sup norm, with the recursion caps.

    The caps come from the iteration's recursive inequality with the
    universal constant set to 1; they illustrate the mechanism rather than
    certify it.
    """
    if levels > 6:
        raise ValueError("levels must be <= 6")
    dev = state.rho.values - state.mean
    norms = [_lp(dev, float(2**j)) for j in range(1, levels + 1)]
    caps: list[float] = []
    log_ups = np.log(max(norms[0], 1.0))
    caps.append(float(np.exp(log_ups)))
    log_rho = max(np.log(state.mean), 0.0) if state.mean > 0 else 0.0
    for n in range(1, levels):
        gamma = (2.0 ** (n + 1) - 1) / (2.0 ** (n + 1) - 2) * log_ups + (
            (n + 1) * np.log(2.0)
        ) / 2.0 ** (n + 1)
        theta = log_ups + ((n + 1) * np.log(2.0) + log_rho) / 2.0 ** (n + 1)
        log_ups = max(gamma, theta)
        caps.append(float(np.exp(log_ups)))
    return MoserReport(norms=norms, caps=caps)
