"""Experiment drivers: the runnable stories behind the acceptance claims.

Each scenario returns a result object carrying machine-readable verdict
lines ("PASS ..." / "FAIL ...", with the tolerance stated inline), plus
the data needed to persist CSV series and snapshots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as dg
from . import flows, initial, solver
from .config import RunConfig
from .spectral import (
    Grid,
    NormConvention,
    ScalarField,
    SpectralCoeffs,
    make_grid,
    sobolev_norm_of_coeffs,
    to_physical,
    to_spectral,
)

__all__ = [
    "SweepRow",
    "SweepResult",
    "MixBenchResult",
    "IneqSuiteResult",
    "build_grid",
    "build_initial",
    "build_flow",
    "scenario_run",
    "scenario_blowup_baseline",
    "scenario_suppression_sweep",
    "scenario_relaxation_rate",
    "scenario_approximation_check",
    "scenario_mixing_bench",
    "scenario_ineq_suite",
    "run_scenario",
]


def build_grid(cfg: RunConfig) -> Grid:
    return make_grid(cfg.grid.dim, cfg.grid.n)


def build_initial(cfg: RunConfig, grid: Grid | None = None) -> ScalarField:
    grid = grid or build_grid(cfg)
    ic = cfg.initial
    mesh = flows.grid_mesh(grid)
    if ic.kind == "constant":
        return ScalarField(grid=grid, values=np.full(grid.shape, ic.mass))
    if ic.kind == "bump":
        return initial.gaussian_bump(grid, ic.mass, ic.radius)
    if ic.kind == "sine":
        vals = ic.mass + ic.amplitude * np.sin(2.0 * np.pi * mesh[..., 0])
        return ScalarField(grid=grid, values=vals)
    noise = initial.random_smooth_field(grid, cfg.scenario.seed, ic.decay)
    scale = float(np.abs(noise.values).max())
    bumped = noise.values / scale if scale > 0 else noise.values
    if ic.kind == "random":
        vals = ic.mass + ic.amplitude * bumped
    else:  # bump_plus_noise
        base = initial.gaussian_bump(grid, ic.mass, ic.radius)
        vals = base.values * (1.0 + ic.amplitude * bumped)
        vals *= ic.mass / vals.mean()
    return ScalarField(grid=grid, values=vals)


def build_flow(cfg: RunConfig) -> flows.FlowSpec:
    """Unit-amplitude flow; scenarios scale it per sweep point."""
    fc = cfg.flow
    dim = cfg.grid.dim
    if fc.kind == "zero":
        flow: flows.FlowSpec = flows.ZeroFlow(dim=dim)
    elif fc.kind == "shear":
        flow = flows.make_shear_alternating(fc.m, fc.t_switch, cfg.scenario.seed, dim)
    elif fc.kind == "cellular":
        flow = flows.make_cellular(fc.m, dim)
    else:
        flow = flows.make_multiscale_mixer(
            fc.levels, fc.per_level_time, grid_n=cfg.grid.n,
            repeats=fc.repeats, cycles=fc.cycles,
        )
    if fc.mollify_delta > 0:
        flow = flows.mollify(flow, fc.mollify_delta)
    return flow


@dataclass(frozen=True)
class SweepRow:
    amplitude: float
    termination: str
    sup_l2_dev: float
    kappa_hat: float = float("nan")  # fitted decay rate of the L2 deviation
    blowup_time: float = float("nan")
    completed_ok: bool = False


@dataclass
class SweepResult:
    scenario: str
    rows: list[SweepRow]
    a0_hat: float | None  # least amplitude with a completed, bounded run
    verdicts: list[str] = field(default_factory=list)
    records: list = field(default_factory=list)  # records of the last run
    final_field: ScalarField | None = None
    final_time: float = 0.0
    rate_trace: list[tuple[float, float, float]] = field(default_factory=list)
    baseline_time: float = float("nan")

    @property
    def passed(self) -> bool:
        return all(v.startswith("PASS") for v in self.verdicts)

    def table(self) -> str:
        lines = ["amplitude,termination,sup_l2_dev,kappa_hat,blowup_time"]
        for r in self.rows:
            lines.append(
                f"{r.amplitude:.17g},{r.termination},{r.sup_l2_dev:.17g},"
                f"{r.kappa_hat:.17g},{r.blowup_time:.17g}"
            )
        if self.a0_hat is not None:
            lines.append(f"# a0_hat = {self.a0_hat:.17g}")
        if self.rate_trace:
            lines.append("# t,second_moment_rate,leading_term")
            for t, rate, lead in self.rate_trace:
                lines.append(f"# {t:.17g},{rate:.17g},{lead:.17g}")
        return "\n".join(lines) + "\n"


def _verdict(ok: bool, text: str) -> str:
    return ("PASS " if ok else "FAIL ") + text


def _run_once(cfg: RunConfig, flow: flows.FlowSpec, T: float):
    rho0 = build_initial(cfg)
    stepper = solver.StepperConfig(
        dt_max=cfg.stepper.dt_max,
        cfl=cfg.stepper.cfl,
        dealias_fraction=cfg.stepper.dealias_fraction,
        negative_tolerance=cfg.stepper.negative_tolerance,
        hyperdiffusion_for_transport=cfg.stepper.hyperdiffusion_for_transport,
        enable_chemotaxis=cfg.stepper.enable_chemotaxis,
        enable_advection=cfg.stepper.enable_advection,
    )
    detector = dg.DetectorConfig(
        criterion_cap=cfg.detector.criterion_cap,
        h1_cap=cfg.detector.h1_cap,
        tail_cap=cfg.detector.tail_cap,
        neg_cap=cfg.detector.neg_cap,
    )
    records, state, term = solver.run_simulation(
        rho0,
        flow,
        T,
        stepper,
        diag_stride=cfg.scenario.diag_stride,
        detector=detector,
        projection_n=cfg.scenario.projection_n,
    )
    return records, state, term


def _sup_l2(records) -> float:
    return max(r.l2_dev for r in records)


def _fit_kappa(records, delay: float) -> float:
    """Least-squares slope of -log l2_dev over t >= delay."""
    pts = [(r.t, r.l2_dev) for r in records if r.t >= delay and r.l2_dev > 1e-300]
    if len(pts) < 2:
        return float("nan")
    ts = np.array([p[0] for p in pts])
    logs = np.log([p[1] for p in pts])
    if np.ptp(ts) <= 0:
        return float("nan")
    slope = np.polyfit(ts, logs, 1)[0]
    return float(-slope)


def scenario_run(cfg: RunConfig) -> SweepResult:
    """Single forward run of the configured system; no sweep assertions."""
    flow = flows.scale_amplitude(build_flow(cfg), cfg.scenario.amplitudes[0])
    records, state, term = _run_once(cfg, flow, cfg.scenario.horizon)
    row = SweepRow(
        amplitude=cfg.scenario.amplitudes[0],
        termination=term,
        sup_l2_dev=_sup_l2(records),
        kappa_hat=_fit_kappa(records, cfg.scenario.fit_delay),
        blowup_time=state.t if term != solver.COMPLETED else float("nan"),
        completed_ok=term == solver.COMPLETED,
    )
    res = SweepResult("RUN", [row], None, records=records,
                      final_field=state.rho, final_time=state.t)
    res.verdicts.append(_verdict(term != solver.OVERFLOW, f"run terminated {term}"))
    return res


def scenario_blowup_baseline(cfg: RunConfig) -> SweepResult:
    """Fixed-flow (usually zero) run of concentrated data; reports the
    detector firing time and the second-moment contraction trace."""
    if cfg.grid.dim != 2:
        raise ValueError("blow-up baseline is 2D only")
    amp = cfg.scenario.amplitudes[0]
    flow = flows.scale_amplitude(build_flow(cfg), amp)
    rho0 = build_initial(cfg)
    phi = initial.radial_cutoff(rho0.grid, min(0.2, 0.25))
    rate0, lead0 = dg.second_moment_rate(rho0, phi, rho0.mean())
    records, state, term = _run_once(cfg, flow, cfg.scenario.horizon)
    rate1, lead1 = dg.second_moment_rate(state.rho, phi, state.mean)
    row = SweepRow(
        amplitude=amp,
        termination=term,
        sup_l2_dev=_sup_l2(records),
        blowup_time=state.t if term == solver.BLOWUP_DETECTED else float("nan"),
        completed_ok=term == solver.COMPLETED,
    )
    res = SweepResult(
        "BLOWUP_BASELINE", [row], None, records=records,
        final_field=state.rho, final_time=state.t,
        rate_trace=[(0.0, rate0, lead0), (state.t, rate1, lead1)],
    )
    supercritical = rho0.mean() > 4.0 * np.pi**2
    if supercritical:
        res.verdicts.append(_verdict(
            term == solver.BLOWUP_DETECTED,
            f"supercritical mass {rho0.mean():.6g}: detector fired={term == solver.BLOWUP_DETECTED}"
            f" at t={state.t:.6g}",
        ))
        res.verdicts.append(_verdict(
            rate0 < 0.0, f"second_moment_rate at t=0 is {rate0:.6g} (< 0 required)"
        ))
    else:
        res.verdicts.append(_verdict(
            term == solver.COMPLETED,
            f"subcritical mass {rho0.mean():.6g}: completed={term == solver.COMPLETED}",
        ))
        devs = [r.l2_dev for r in records]
        mono = all(b <= a * (1 + 1e-9) for a, b in zip(devs, devs[1:]))
        res.verdicts.append(_verdict(mono, "L2 deviation monotone decay (rel tol 1e-9)"))
    return res


def _monotone_with_one_inversion(values: list[float], slack: float) -> bool:
    """Non-increasing, tolerating at most one adjacent inversion <= slack."""
    inversions = 0
    for a, b in zip(values, values[1:]):
        if b > a:
            if b > a * (1 + slack):
                return False
            inversions += 1
    return inversions <= 1


def scenario_suppression_sweep(cfg: RunConfig) -> SweepResult:
    """Amplitude sweep of the configured flow on blow-up-prone data."""
    sc = cfg.scenario
    horizon = sc.horizon
    baseline_time = float("nan")
    if horizon <= 0:
        # default: outlive the zero-flow blow-up of the same data by 5x
        base_cfg = _with(cfg, horizon=1.0, amplitudes=(0.0,))
        _, base_state, base_term = _run_once(
            base_cfg, flows.ZeroFlow(dim=cfg.grid.dim), 1.0
        )
        if base_term != solver.BLOWUP_DETECTED:
            raise ValueError("horizon<=0 needs blow-up-prone data for the default")
        baseline_time = base_state.t
        horizon = 5.0 * baseline_time
    rows = []
    last = None
    for amp in sc.amplitudes:
        flow = flows.scale_amplitude(build_flow(cfg), amp)
        records, state, term = _run_once(cfg, flow, horizon)
        sup = _sup_l2(records)
        ok = term == solver.COMPLETED and sup <= 2.0 * sc.b
        rows.append(SweepRow(
            amplitude=amp, termination=term, sup_l2_dev=sup,
            blowup_time=state.t if term == solver.BLOWUP_DETECTED else float("nan"),
            completed_ok=ok,
        ))
        last = (records, state)
    completing = [r.amplitude for r in rows if r.completed_ok]
    a0_hat = min(completing) if completing else None
    res = SweepResult(
        "SUPPRESSION_SWEEP", rows, a0_hat,
        records=last[0], final_field=last[1].rho, final_time=last[1].t,
        baseline_time=baseline_time,
    )
    res.verdicts.append(_verdict(
        a0_hat is not None,
        f"some amplitude completes horizon {horizon:.6g} with sup l2_dev <= 2B={2*sc.b:.6g}"
        f" (a0_hat={a0_hat})",
    ))
    sups = [r.sup_l2_dev for r in rows]
    res.verdicts.append(_verdict(
        _monotone_with_one_inversion(sups, 0.05),
        "sup l2_dev non-increasing along amplitudes (one <=5% inversion tolerated)",
    ))
    return res


def scenario_relaxation_rate(cfg: RunConfig) -> SweepResult:
    """Fits the exponential relaxation rate per amplitude."""
    sc = cfg.scenario
    rows = []
    last = None
    for amp in sc.amplitudes:
        flow = flows.scale_amplitude(build_flow(cfg), amp)
        records, state, term = _run_once(cfg, flow, sc.horizon)
        kappa = (
            _fit_kappa(records, sc.fit_delay)
            if term == solver.COMPLETED
            else float("nan")
        )
        rows.append(SweepRow(
            amplitude=amp, termination=term, sup_l2_dev=_sup_l2(records),
            kappa_hat=kappa, completed_ok=term == solver.COMPLETED,
        ))
        last = (records, state)
    res = SweepResult(
        "RELAXATION_RATE", rows, None,
        records=last[0], final_field=last[1].rho, final_time=last[1].t,
    )
    usable = [r.kappa_hat for r in rows if r.completed_ok and math.isfinite(r.kappa_hat)]
    mono = all(b >= a * (1 - 1e-6) for a, b in zip(usable, usable[1:]))
    res.verdicts.append(_verdict(
        mono and len(usable) >= min(2, len(rows)),
        f"kappa_hat nondecreasing over completed amplitudes (rel tol 1e-6): "
        + ",".join(f"{k:.6g}" for k in usable),
    ))
    return res


def scenario_approximation_check(cfg: RunConfig) -> list[tuple[float, float]]:
    """Full dynamics vs pure transport over a fixed flow-time budget."""
    sc = cfg.scenario
    rho0 = build_initial(cfg)
    stepper = solver.StepperConfig(
        dt_max=cfg.stepper.dt_max,
        cfl=cfg.stepper.cfl,
        dealias_fraction=cfg.stepper.dealias_fraction,
        negative_tolerance=cfg.stepper.negative_tolerance,
    )
    out = []
    for amp in sc.amplitudes:
        flow = flows.scale_amplitude(build_flow(cfg), amp)
        window = sc.tau_phys / amp if amp > 0 else sc.tau_phys
        _, sup = solver.paired_run(rho0, flow, window, stepper)
        out.append((amp, sup))
    return out


@dataclass
class MixBenchResult:
    rows: list[tuple[float, float, float, float, int]]
    # (epsilon_target, time_to_target, kappa_hat, mixedness_at_level, level)
    hm1_trace: list[tuple[float, float]]
    mixedness_trace: list[tuple[float, float]]
    verdicts: list[str] = field(default_factory=list)
    final_field: ScalarField | None = None
    final_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(v.startswith("PASS") for v in self.verdicts)

    def table(self) -> str:
        lines = ["epsilon_target,time_to_target,kappa_hat,mixedness,level"]
        for eps, t, kap, mix, lvl in self.rows:
            lines.append(f"{eps:.17g},{t:.17g},{kap:.17g},{mix:.17g},{lvl}")
        lines.append("# log-log scaling table: log2(1/eps), log2(time)")
        for eps, t, *_ in self.rows:
            if math.isfinite(t):
                lines.append(f"# {math.log2(1.0 / eps):.6g},{math.log2(t):.6g}")
        lines.append("# t,hm1")
        for t, v in self.hm1_trace:
            lines.append(f"# {t:.17g},{v:.17g}")
        return "\n".join(lines) + "\n"


def _advertised_level(eps: float, grid_n: int) -> int:
    level = math.ceil(abs(math.log2(eps * eps))) + 2
    return max(1, min(level, int(math.log2(grid_n)) - 2))


def scenario_mixing_bench(cfg: RunConfig) -> MixBenchResult:
    """Pure transport of the configured field under the multiscale mixer."""
    if cfg.grid.dim != 2:
        raise ValueError("mixing bench is 2D only")
    grid = build_grid(cfg)
    f = build_initial(cfg)
    f = ScalarField(grid=grid, values=f.values - f.mean())
    linf0 = float(np.abs(f.values).max())
    mixer = flows.make_multiscale_mixer(
        cfg.flow.levels, cfg.flow.per_level_time,
        grid_n=cfg.grid.n, repeats=cfg.flow.repeats, cycles=cfg.flow.cycles,
    )
    dt = cfg.stepper.dt_max
    steps_per_stage = max(1, int(math.ceil(cfg.flow.per_level_time / dt)))
    h = cfg.flow.per_level_time / steps_per_stage
    n_stages = cfg.flow.levels * cfg.flow.repeats
    level_probe = _advertised_level(min(cfg.scenario.eps_targets), cfg.grid.n)

    def hm1_of(g: ScalarField) -> float:
        return sobolev_norm_of_coeffs(to_spectral(g), -1.0, NormConvention.PAPER)

    hm1_trace = [(0.0, hm1_of(f))]
    mixed_trace = [(0.0, dg.cell_mixedness(f, level_probe).mixedness)]
    stage_hm1 = [hm1_of(f)]
    targets = sorted(cfg.scenario.eps_targets, reverse=True)
    hit: dict[float, tuple[float, float]] = {}
    t = 0.0
    field_now = f
    if linf0 > 0:
        for _ in range(n_stages):
            for _ in range(steps_per_stage):
                field_now = solver.transport_step(field_now, mixer, t, h)
                t += h
                hm1 = hm1_of(field_now)
                hm1_trace.append((t, hm1))
                for eps in targets:
                    if eps not in hit and hm1 <= eps * linf0:
                        level = _advertised_level(eps, cfg.grid.n)
                        mix = dg.cell_mixedness(field_now, level).mixedness
                        hit[eps] = (t, hm1, mix)
            stage_hm1.append(hm1_of(field_now))
            mixed_trace.append((t, dg.cell_mixedness(field_now, level_probe).mixedness))
    rows = []
    for eps in sorted(cfg.scenario.eps_targets, reverse=True):
        level = _advertised_level(eps, cfg.grid.n)
        if eps in hit:
            t_hit, hm1_hit, mix = hit[eps]
            # mix-norm-implied cell-average smallness at the dyadic scale
            kappa_hat = hm1_hit * 2.0**level / linf0
        else:
            t_hit, kappa_hat, mix = float("nan"), float("nan"), float("nan")
        rows.append((eps, t_hit, kappa_hat, mix, level))
    res = MixBenchResult(
        rows=rows, hm1_trace=hm1_trace, mixedness_trace=mixed_trace,
        final_field=field_now, final_time=t,
    )
    if linf0 == 0:
        res.verdicts.append(_verdict(True, "zero field: all traces identically 0"))
        return res
    mono = all(b < a for a, b in zip(stage_hm1, stage_hm1[1:]))
    res.verdicts.append(_verdict(mono, "hm1 strictly decreasing across stage boundaries"))
    reduction = stage_hm1[0] / stage_hm1[-1]
    res.verdicts.append(_verdict(
        reduction >= 4.0, f"hm1 reduced {reduction:.3g}x over the schedule (>= 4x required)"
    ))
    cross = all(mix <= kap for _, _, kap, mix, _ in rows if math.isfinite(kap))
    res.verdicts.append(_verdict(
        cross and hit, "cell mixedness below the mix-norm-implied kappa_hat at each met target"
    ))
    return res


@dataclass
class IneqSuiteResult:
    table_rows: list[tuple[str, float, float, float, float, float]]
    # (name, max_n1, median_n1, max_n2, median_n2, stability_factor)
    verdicts: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.startswith("PASS") for v in self.verdicts)

    def table(self) -> str:
        lines = ["inequality,max_coarse,median_coarse,max_fine,median_fine,stability"]
        for row in self.table_rows:
            name, *vals = row
            lines.append(name + "," + ",".join(f"{v:.17g}" for v in vals))
        return "\n".join(lines) + "\n"


def _refine(f: ScalarField, n2: int) -> ScalarField:
    """Exact spectral upsampling (zero padding); requires n2 >= grid n."""
    grid = f.grid
    c = to_spectral(f).coeffs
    fine = make_grid(grid.dim, n2)
    k = (np.fft.fftfreq(grid.n) * grid.n).astype(int)
    idx = k % n2
    new = np.zeros(fine.shape, dtype=np.complex128)
    new[np.ix_(*([idx] * grid.dim))] = c
    return to_physical(SpectralCoeffs(grid=fine, coeffs=new))


def _sob_interp_ratio(f: ScalarField, s: float) -> float:
    c = to_spectral(f)
    hs = sobolev_norm_of_coeffs(c, s, NormConvention.PAPER)
    lo = sobolev_norm_of_coeffs(c, s - 1.0, NormConvention.PAPER)
    hi = sobolev_norm_of_coeffs(c, s + 1.0, NormConvention.PAPER)
    denom = np.sqrt(lo * hi)
    return float(hs / denom) if denom > 0 else 0.0


def scenario_ineq_suite(cfg: RunConfig) -> IneqSuiteResult:
    """Empirical constants of the functional inequalities over ensembles
    of random smooth fields at two resolutions."""
    sc = cfg.scenario
    grid = build_grid(cfg)
    d = grid.dim
    cases: list[tuple[str, object]] = [
        ("GN14(m=0,p=inf,n=2)", dg.GN14(0, np.inf, 2)),
        ("GN14(m=1,p=2,n=2)", dg.GN14(1, 2.0, 2)),
        ("NASH16(s=1)", dg.NASH16(1.0)),
        ("GN66(q=3,r=2)", dg.GN66(3.0, 2.0)),
        ("SOB_INTERP(s=1)", None),
    ]
    ratios = {name: ([], []) for name, _ in cases}
    for i in range(sc.ensemble_size):
        coarse = initial.random_smooth_field(grid, sc.seed * 1000003 + i, sc.c2 + 2.5)
        fine = _refine(coarse, 2 * grid.n)
        for which, g in ((0, coarse), (1, fine)):
            for name, sel in cases:
                if sel is None:
                    val = _sob_interp_ratio(g, 1.0)
                else:
                    val = dg.inequality_ratios(g, sel)
                ratios[name][which].append(val)
    rows = []
    all_finite = True
    worst_stability = 0.0
    for name, _ in cases:
        lo, hi = (np.array(ratios[name][0]), np.array(ratios[name][1]))
        all_finite &= bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))
        with np.errstate(divide="ignore", invalid="ignore"):
            per_field = np.where(lo > 0, hi / lo, 1.0)
        stability = float(max(per_field.max(), (1.0 / per_field).max()))
        worst_stability = max(worst_stability, stability)
        rows.append((
            name, float(lo.max()), float(np.median(lo)),
            float(hi.max()), float(np.median(hi)), stability,
        ))
    res = IneqSuiteResult(table_rows=rows)
    res.verdicts.append(_verdict(all_finite, "all empirical constants finite"))
    res.verdicts.append(_verdict(
        worst_stability <= 2.0,
        f"refinement stability {worst_stability:.4g} (<= 2x required)",
    ))
    return res


def _with(cfg: RunConfig, **scenario_updates) -> RunConfig:
    import dataclasses

    return dataclasses.replace(
        cfg, scenario=dataclasses.replace(cfg.scenario, **scenario_updates)
    )


def run_scenario(cfg: RunConfig):
    """Dispatch on cfg.scenario.name; returns the scenario's result object."""
    name = cfg.scenario.name
    if name == "RUN":
        return scenario_run(cfg)
    if name == "BLOWUP_BASELINE":
        return scenario_blowup_baseline(cfg)
    if name == "SUPPRESSION_SWEEP":
        return scenario_suppression_sweep(cfg)
    if name == "RELAXATION_RATE":
        return scenario_relaxation_rate(cfg)
    if name == "APPROXIMATION_CHECK":
        pairs = scenario_approximation_check(cfg)
        rows = [SweepRow(amplitude=a, termination=solver.COMPLETED, sup_l2_dev=s,
                         completed_ok=True) for a, s in pairs]
        res = SweepResult("APPROXIMATION_CHECK", rows, None)
        sups = [s for _, s in pairs]
        res.verdicts.append(_verdict(
            _monotone_with_one_inversion(sups, 0.05) or max(sups) == 0.0,
            "paired-run sup distance decreasing in amplitude (one <=5% inversion tolerated)",
        ))
        return res
    if name == "MIXING_BENCH":
        return scenario_mixing_bench(cfg)
    if name == "INEQ_SUITE":
        return scenario_ineq_suite(cfg)
    raise ValueError(f"unknown scenario {name!r}")
