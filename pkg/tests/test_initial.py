"""Tests for initial densities, cutoffs, and the blow-up parameter recipe."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ksmix.initial import (
    blowup_parameters,
    gaussian_bump,
    radial_cutoff,
    random_smooth_field,
)
from ksmix.spectral import make_grid, sobolev_norm, to_spectral

GRID = make_grid(2, 128)


class TestGaussianBump:
    def test_exact_quadrature_mass(self):
        for mass in (1.0, 7.5, 100.0):
            f = gaussian_bump(GRID, mass, 0.05)
            assert f.mean() == pytest.approx(mass, rel=1e-12)

    def test_strictly_positive(self):
        f = gaussian_bump(GRID, 1.0, 0.05)
        assert f.values.min() > 0.0

    def test_even_symmetry(self):
        # centered at the origin, so values at x and -x coincide
        f = gaussian_bump(GRID, 1.0, 0.05)
        flipped = f.values.copy()
        for ax in range(2):
            flipped = np.flip(np.roll(flipped, -1, axis=ax), axis=ax)
        assert np.max(np.abs(f.values - flipped)) < 1e-12

    def test_peak_at_center(self):
        f = gaussian_bump(GRID, 1.0, 0.05, center=(0.25, 0.25))
        idx = np.unravel_index(np.argmax(f.values), f.values.shape)
        assert idx == (32, 32)

    def test_rejects_unresolvable_width(self):
        with pytest.raises(ValueError):
            gaussian_bump(make_grid(2, 16), 1.0, 0.05)  # < 3 spacings

    def test_rejects_bad_mass_and_width(self):
        with pytest.raises(ValueError):
            gaussian_bump(GRID, -1.0, 0.05)
        with pytest.raises(ValueError):
            gaussian_bump(GRID, 1.0, 0.3)


class TestRadialCutoff:
    def test_plateau_and_support(self):
        b = 0.1
        f = radial_cutoff(GRID, b)
        mesh = np.sqrt(
            sum(np.broadcast_to(a, GRID.shape) ** 2 for a in GRID.coords())
        )
        assert np.all(f.values[mesh <= b * (1 - 1e-9)] == 1.0)
        assert np.all(f.values[mesh >= 2 * b * (1 + 1e-9)] == 0.0)

    def test_range(self):
        f = radial_cutoff(GRID, 0.1)
        assert f.values.min() >= 0.0
        assert f.values.max() <= 1.0

    def test_gradient_bound(self):
        b = 0.1
        f = radial_cutoff(GRID, b)
        gx = np.gradient(f.values, GRID.spacing, axis=0)
        gy = np.gradient(f.values, GRID.spacing, axis=1)
        assert np.sqrt(gx**2 + gy**2).max() <= 4.0 / b

    def test_rejects_unresolvable_scale(self):
        with pytest.raises(ValueError):
            radial_cutoff(make_grid(2, 16), 0.1)


class TestBlowupParameters:
    def test_reference_values(self):
        r = blowup_parameters(1.0, 1.0, 1.0, 1.0)
        assert r.cutoff_scale == pytest.approx(0.001)
        assert r.mass == pytest.approx(1000.0)
        assert r.radius == pytest.approx(0.001 / 100.0)
        assert r.tau == pytest.approx(100.0 * r.radius**2 / r.mass)

    def test_constraints_hold(self):
        r = blowup_parameters(2.0, 3.0, 0.5, 10.0)
        assert 0 < 2 * r.radius < r.cutoff_scale <= 0.25
        assert r.mass > 1

    @given(
        c1=st.floats(0.1, 100.0),
        c2=st.floats(0.1, 100.0),
        c3=st.floats(0.1, 100.0),
        c4=st.floats(0.1, 100.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_recipe_always_admissible(self, c1, c2, c3, c4):
        r = blowup_parameters(c1, c2, c3, c4)
        assert 0 < 2 * r.radius < r.cutoff_scale <= 0.25
        assert r.mass > 1
        assert r.tau > 0

    def test_larger_constants_shrink_the_scales(self):
        small = blowup_parameters(1.0, 1.0, 1.0, 1.0)
        big = blowup_parameters(10.0, 10.0, 10.0, 10.0)
        assert big.cutoff_scale <= small.cutoff_scale
        assert big.radius <= small.radius
        assert big.mass >= small.mass

    def test_rejects_nonpositive_constants(self):
        with pytest.raises(ValueError):
            blowup_parameters(0.0, 1.0, 1.0, 1.0)


class TestRandomSmoothField:
    def test_mean_zero(self):
        f = random_smooth_field(GRID, seed=0, decay=3.0)
        assert abs(f.mean()) < 1e-14

    def test_deterministic(self):
        a = random_smooth_field(GRID, seed=5, decay=3.0)
        b = random_smooth_field(GRID, seed=5, decay=3.0)
        assert np.array_equal(a.values, b.values)

    def test_seeds_decorrelated(self):
        a = random_smooth_field(GRID, seed=1, decay=3.0).values.ravel()
        b = random_smooth_field(GRID, seed=2, decay=3.0).values.ravel()
        corr = np.corrcoef(a, b)[0, 1]
        assert abs(corr) < 0.2

    def test_band_limited(self):
        f = random_smooth_field(GRID, seed=3, decay=3.0)
        c = to_spectral(f).coeffs
        k = np.fft.fftfreq(GRID.n, d=1.0 / GRID.n)
        k2 = k[:, None] ** 2 + k[None, :] ** 2
        outside = k2 > (GRID.n / 3.0) ** 2
        assert np.max(np.abs(c[outside])) < 1e-13

    def test_smoothness_improves_with_decay(self):
        rough = random_smooth_field(GRID, seed=4, decay=2.5)
        smooth = random_smooth_field(GRID, seed=4, decay=4.0)

        def roughness(f):
            return sobolev_norm(f, 2.0) / sobolev_norm(f, 0.0)

        assert roughness(smooth) < roughness(rough)

    def test_rejects_small_decay(self):
        with pytest.raises(ValueError):
            random_smooth_field(GRID, seed=0, decay=2.0)
        with pytest.raises(ValueError):
            random_smooth_field(make_grid(3, 16), seed=0, decay=2.5)
