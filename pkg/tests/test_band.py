"""Analytic weights, f-plus and the band clocks."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thinstrip.band import (
    AnalyticBandState, BandExhaustedError, ClockInvariantError, WeightOverflowError, analytic_weight, apply_weight,
    clock_rows, convexity_check, plus_abs, step_clock, weight_multiplier,
)
from thinstrip.spectral import GridSpec, multiply, multiply_coeffs, random_field

SEEDS = st.integers(0, 2**32 - 1)


class TestWeights:
    def test_weight_inverts(self, grid, rng):
        f = random_field(grid, rng)
        back = analytic_weight(analytic_weight(f, 0.3), -0.3)
        assert (back - f).l2_norm() < 1e-14 * f.l2_norm()

    def test_overflow_is_refused(self):
        g = GridSpec(Lx=1.0, Nx=256, Ny=9)
        with pytest.raises(WeightOverflowError):
            weight_multiplier(g, 1.0)

    def test_apply_weight_refuses_negative_band(self, grid):
        band = AnalyticBandState(a=0.1, rate=1.0, clock=0.2)
        with pytest.raises(BandExhaustedError):
            apply_weight(random_field(grid, np.random.default_rng(0)), band)


class TestPlus:
    @given(seed=SEEDS)
    def test_plancherel(self, seed):
        g = GridSpec(Nx=32, Ny=9)
        f = random_field(g, np.random.default_rng(seed))
        assert abs(plus_abs(f).l2_norm() - f.l2_norm()) <= 1e-12 * f.l2_norm()

    @given(seed=SEEDS, width=st.floats(0.0, 0.2))
    def test_weighted_product_domination(self, seed, width):
        g = GridSpec(Nx=32, Ny=9)
        r = np.random.default_rng(seed)
        f, h = random_field(g, r), random_field(g, r)
        w = weight_multiplier(g, width)[:, None]
        lhs = np.abs(w * multiply(f, h).coeffs)
        rhs = multiply_coeffs(w * plus_abs(f).coeffs, w * plus_abs(h).coeffs, g.Nx).real
        assert (rhs - lhs).min() >= -1e-10

    def test_plus_is_idempotent(self, grid, rng):
        p = plus_abs(random_field(grid, rng))
        assert np.array_equal(plus_abs(p).coeffs, p.coeffs)


class TestClock:
    def test_band_state_validation(self):
        with pytest.raises(ValueError):
            AnalyticBandState(a=0.0, rate=1.0)
        with pytest.raises(ValueError):
            AnalyticBandState(a=1.0, rate=1.0, kind="zeta")

    def test_step_accumulates(self):
        band = AnalyticBandState(a=1.0, rate=2.0)
        for _ in range(4):
            step_clock(band, 0.5, 0.1)
        assert band.clock == pytest.approx(0.2)
        assert band.width == pytest.approx(0.6)
        assert len(clock_rows(band)) == 5

    @given(drivers=st.lists(st.floats(0, 10), min_size=1, max_size=30))
    def test_clock_is_monotone(self, drivers):
        band = AnalyticBandState(a=1.0, rate=1.0)
        for d in drivers:
            step_clock(band, d, 0.01)
        c = [c for _, c in band.history]
        assert all(b >= a for a, b in zip(c, c[1:]))

    def test_crossing_time_interpolated(self):
        band = AnalyticBandState(a=1.0, rate=1.0)
        step_clock(band, 4.0, 0.5)  # clock goes 0 -> 2, crosses 1 at t = 0.25
        assert band.exhausted_at == pytest.approx(0.25)
        assert not band.positive

    def test_bad_driver(self):
        band = AnalyticBandState(a=1.0, rate=1.0)
        with pytest.raises(ClockInvariantError):
            step_clock(band, float("nan"), 0.1)
        with pytest.raises(ClockInvariantError):
            step_clock(band, -1.0, 0.1)

    @given(xi=st.floats(-1e3, 1e3), eta=st.floats(-1e3, 1e3))
    def test_subadditive_weight(self, xi, eta):
        assert convexity_check(xi, eta, AnalyticBandState(a=0.5, rate=1.0))

    def test_snapshot_is_independent(self):
        band = AnalyticBandState(a=1.0, rate=1.0)
        snap = band.snapshot()
        step_clock(band, 1.0, 0.1)
        assert snap.clock == 0.0 and len(snap.history) == 1
