"""Tests for the IMEX chemotaxis stepper, semi-Lagrangian transport, and
trajectory integration."""

import numpy as np
import pytest

from ksmix.flows import FlowSpec, ZeroFlow, make_cellular, make_multiscale_mixer, make_shear_alternating
from ksmix.solver import (
    BLOWUP_DETECTED,
    COMPLETED,
    CflError,
    StepperConfig,
    _rk4,
    flow_map,
    ks_step,
    make_state,
    paired_run,
    run_simulation,
    transport_step,
)
from ksmix.spectral import (
    NormConvention,
    ScalarField,
    make_grid,
    sobolev_norm,
    to_spectral,
)

GRID = make_grid(2, 64)
CFG = StepperConfig()


class ConstantFlow(FlowSpec):
    """Uniform translation; handy because the exact solution is a shift."""

    dim = 2
    lipschitz_bound = 0.0

    def __init__(self, v):
        self.v = np.asarray(v, dtype=np.float64)

    def velocity(self, x, t):
        x = np.asarray(x, dtype=np.float64)
        return np.broadcast_to(self.v, x.shape).copy()


def sine_field(grid, mean=1.0, eps=0.1):
    x = grid.coords()[0]
    vals = mean + eps * np.sin(2 * np.pi * x)
    return ScalarField(grid=grid, values=np.broadcast_to(vals, grid.shape).copy())


def smooth_positive_field(grid, seed=0):
    from ksmix.initial import random_smooth_field

    noise = random_smooth_field(grid, seed=seed, decay=3.0)
    vals = 1.0 + 0.3 * noise.values / np.abs(noise.values).max()
    return ScalarField(grid=grid, values=vals)


class TestKsStep:
    def test_constant_is_fixed_point(self):
        rho0 = ScalarField(grid=GRID, values=np.full(GRID.shape, 2.5))
        state = make_state(rho0)
        out = ks_step(state, ZeroFlow(), 1e-3, CFG)
        assert np.max(np.abs(out.rho.values - 2.5)) < 1e-13

    def test_mass_conserved_each_step(self):
        state = make_state(smooth_positive_field(GRID))
        m0 = state.rho_hat.coeffs[0, 0].real
        for _ in range(50):
            state = ks_step(state, make_shear_alternating(1, 0.01, 0), 1e-3, CFG)
        assert abs(state.rho_hat.coeffs[0, 0].real - m0) < 1e-13

    def test_linearized_growth_factor(self):
        # around mean 1, mode k grows like exp((1 - 4 pi^2 |k|^2) t)
        eps = 1e-3
        state = make_state(sine_field(GRID, mean=1.0, eps=eps))
        state = ks_step(state, ZeroFlow(), 1e-3, CFG)
        amp = 2.0 * abs(state.rho_hat.coeffs[1, 0])
        exact = eps * np.exp((1.0 - 4.0 * np.pi**2) * 1e-3)
        assert amp == pytest.approx(exact, rel=1e-4)

    def test_pure_diffusion_is_exact(self):
        cfg = StepperConfig(enable_chemotaxis=False, enable_advection=False)
        state = make_state(sine_field(GRID, mean=1.0, eps=0.5))
        T, dt = 0.01, 1e-3
        for _ in range(int(round(T / dt))):
            state = ks_step(state, ZeroFlow(), dt, cfg)
        exact = sine_field(GRID, mean=1.0, eps=0.5 * np.exp(-4 * np.pi**2 * T))
        assert np.max(np.abs(state.rho.values - exact.values)) < 1e-12

    def test_cfl_violation_raises(self):
        fast = make_cellular(m=1)
        state = make_state(sine_field(GRID))
        cfg = StepperConfig(dt_max=1.0)
        with pytest.raises(CflError):
            ks_step(state, fast, 0.5, cfg)

    def test_second_order_in_time(self):
        def final_state(dt, nsteps):
            cfg = StepperConfig(dt_max=dt)
            state = make_state(smooth_positive_field(GRID, seed=1))
            for _ in range(nsteps):
                state = ks_step(state, ZeroFlow(), dt, cfg)
            return state.rho.values

        ref = final_state(2.5e-4, 80)
        e1 = np.max(np.abs(final_state(2e-3, 10) - ref))
        e2 = np.max(np.abs(final_state(1e-3, 20) - ref))
        assert 3.0 < e1 / e2 < 5.0

    def test_criterion_integral_accumulates(self):
        state = make_state(sine_field(GRID, mean=1.0, eps=0.2))
        dev0 = sobolev_norm(state.rho, 0.0, NormConvention.PAPER)
        out = ks_step(state, ZeroFlow(), 1e-3, CFG)
        assert out.criterion_integral == pytest.approx(1e-3 * dev0**2, rel=1e-12)


class TestTransport:
    def test_zero_flow_identity(self):
        f = sine_field(GRID, mean=0.0, eps=1.0)
        out = transport_step(f, ZeroFlow(), 0.0, 0.1)
        assert np.max(np.abs(out.values - f.values)) < 1e-12

    def test_constant_flow_is_a_shift(self):
        g = make_grid(2, 64)
        f = sine_field(g, mean=0.0, eps=1.0)
        # displacement 0.25 = 16 whole cells, so the shift is exact
        out = transport_step(f, ConstantFlow((0.25, 0.0)), 0.0, 1.0)
        expect = np.roll(f.values, 16, axis=0)
        assert np.max(np.abs(out.values - expect)) < 1e-8

    def test_range_overshoot_is_tiny(self):
        g = make_grid(2, 128)
        f = sine_field(g, mean=0.0, eps=1.0)
        out = transport_step(f, make_cellular(m=1), 0.0, 0.05)
        osc = f.values.max() - f.values.min()
        assert out.values.max() <= f.values.max() + 1e-6 * osc
        assert out.values.min() >= f.values.min() - 1e-6 * osc

    def test_l2_nearly_conserved_unit_time(self):
        g = make_grid(2, 128)
        f = sine_field(g, mean=0.0, eps=1.0)
        flow = make_multiscale_mixer(levels=1, per_level_time=1.0)
        l2_0 = np.sqrt(np.mean(f.values**2))
        t = 0.0
        for _ in range(20):
            f = transport_step(f, flow, t, 0.05)
            t += 0.05
        l2_1 = np.sqrt(np.mean(f.values**2))
        assert abs(l2_1 - l2_0) / l2_0 < 1e-4

    def test_rejects_nonpositive_dt(self):
        f = sine_field(GRID)
        with pytest.raises(ValueError):
            transport_step(f, ZeroFlow(), 0.0, -0.1)


class TestFlowMap:
    def test_zero_flow(self):
        end, disp = flow_map(ZeroFlow(), (0.3, 0.8), 0.0, 1.0, dt=0.1)
        assert np.allclose(end, (0.3, 0.8))
        assert np.allclose(disp, 0.0)

    def test_constant_flow_displacement(self):
        end, disp = flow_map(ConstantFlow((0.75, 0.0)), (0.5, 0.5), 0.0, 2.0, dt=0.01)
        assert np.allclose(disp, (1.5, 0.0), atol=1e-12)
        assert np.allclose(end, (0.0, 0.5), atol=1e-12)

    def test_cellular_volume_preserved(self):
        # Jacobian determinant of the time-1 map by finite differences
        flow = make_cellular(m=1)
        h = 1e-5
        base = np.array([0.13, 0.31])
        cols = []
        for j in range(2):
            plus = base.copy()
            plus[j] += h
            minus = base.copy()
            minus[j] -= h
            _, dp = flow_map(flow, plus, 0.0, 1.0, dt=1e-3)
            _, dm = flow_map(flow, minus, 0.0, 1.0, dt=1e-3)
            cols.append((np.asarray(dp) + plus - np.asarray(dm) - minus) / (2 * h))
        det = cols[0][0] * cols[1][1] - cols[0][1] * cols[1][0]
        assert det == pytest.approx(1.0, abs=1e-6)

    def test_time_reversal(self):
        flow = make_cellular(m=2)
        start = np.array([0.21, 0.47])
        _, disp = flow_map(flow, start, 0.0, 1.0, dt=1e-3)
        pos = start + disp
        for _ in range(1000):  # march back with negative steps
            pos = _rk4(flow, pos, 1.0, -1e-3)
        assert np.max(np.abs(pos - start)) < 1e-8

    def test_rejects_reversed_interval(self):
        with pytest.raises(ValueError):
            flow_map(ZeroFlow(), (0.0, 0.0), 1.0, 0.0, dt=0.1)


class TestRunSimulation:
    def test_equilibrium_stays_put(self):
        rho0 = ScalarField(grid=GRID, values=np.full(GRID.shape, 1.0))
        records, state, term = run_simulation(rho0, ZeroFlow(), 0.05, CFG)
        assert term == COMPLETED
        assert records[-1].l2_dev < 1e-12
        assert state.t == pytest.approx(0.05)

    def test_small_data_decays_monotonically(self):
        rho0 = sine_field(GRID, mean=1.0, eps=0.1)
        records, _, term = run_simulation(rho0, ZeroFlow(), 0.05, CFG)
        assert term == COMPLETED
        devs = [r.l2_dev for r in records]
        assert all(b < a for a, b in zip(devs, devs[1:]))

    def test_detector_stops_run(self):
        from ksmix.diagnostics import DetectorConfig

        rho0 = sine_field(GRID, mean=1.0, eps=0.1)
        det = DetectorConfig(h1_cap=1e-6)  # absurdly low: fires immediately
        _, _, term = run_simulation(rho0, ZeroFlow(), 0.05, CFG, detector=det)
        assert term == BLOWUP_DETECTED

    def test_rejects_negative_initial_data(self):
        vals = np.full(GRID.shape, 1.0)
        vals[0, 0] = -0.5
        with pytest.raises(ValueError):
            run_simulation(ScalarField(grid=GRID, values=vals), ZeroFlow(), 0.1, CFG)

    def test_records_cover_endpoints(self):
        rho0 = sine_field(GRID)
        records, _, _ = run_simulation(rho0, ZeroFlow(), 0.02, CFG, diag_stride=5)
        assert records[0].t == 0.0
        assert records[-1].t == pytest.approx(0.02)


class TestPairedRun:
    def test_constant_data_identical(self):
        rho0 = ScalarField(grid=GRID, values=np.full(GRID.shape, 1.0))
        trace, sup = paired_run(rho0, ZeroFlow(), 0.05, CFG)
        assert sup < 1e-13

    def test_linearized_distance(self):
        # zero flow: transport freezes the data while the mode-1 deviation
        # of the full dynamics evolves by exp((1 - 4 pi^2) t)
        eps = 1e-3
        rho0 = sine_field(GRID, mean=1.0, eps=eps)
        T = 0.05
        trace, _ = paired_run(rho0, ZeroFlow(), T, CFG)
        t_end, dist = trace[-1]
        exact = eps * np.sqrt(0.5) * abs(np.exp((1 - 4 * np.pi**2) * T) - 1.0)
        assert t_end == pytest.approx(T)
        assert dist == pytest.approx(exact, rel=0.05)


class TestRefinementStability:
    def test_final_state_stable_under_refinement(self):
        def final_low_modes(n):
            g = make_grid(2, n)
            rho0 = sine_field(g, mean=1.0, eps=0.2)
            _, state, term = run_simulation(rho0, ZeroFlow(), 0.1, CFG)
            assert term == COMPLETED
            c = state.rho_hat.coeffs
            idx = np.fft.fftfreq(16, d=1.0 / 16).astype(int)
            return c[np.ix_(idx, idx)]

        diff = final_low_modes(32) - final_low_modes(64)
        assert np.max(np.abs(diff)) < 1e-6
