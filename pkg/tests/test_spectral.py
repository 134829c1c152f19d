"""Fourier-Chebyshev transforms, derivatives and the dyadic ladder."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thinstrip.spectral import (
    DEFAULT_CUTOFFS, DyadicRangeError, Field2D, GridMismatchError, GridSpec, bump, d2_dy2, d_dx, d_dy,
    dyadic_project, dyadic_range, dyadic_table, from_function, integral_y_from_0, inverse_transform, ladder,
    low_pass, mean_y, multiply, random_field, transform,
)

GRIDS = st.sampled_from([GridSpec(Nx=16, Ny=9), GridSpec(Nx=64, Ny=9), GridSpec(Lx=1.0, Nx=32, Ny=9),
                         GridSpec(Lx=20.0, Nx=128, Ny=9)])
SEEDS = st.integers(0, 2**32 - 1)


class TestTransforms:
    def test_round_trip(self, grid, rng):
        vals = rng.standard_normal(grid.shape)
        f = transform(grid, vals)
        # Nyquist is dropped, so compare after one projection
        g = transform(grid, inverse_transform(f))
        assert np.allclose(g.coeffs, f.coeffs, atol=1e-14)

    def test_dx_of_sine_is_exact(self, grid):
        k = 2 * np.pi / grid.Lx
        f = from_function(grid, lambda X, Y: np.sin(3 * k * X) * (1 - Y**2))
        want = 3 * k * np.cos(3 * k * grid.mesh()[0]) * (1 - grid.mesh()[1] ** 2)
        assert np.abs(d_dx(f).values() - want).max() < 1e-12

    def test_vertical_derivatives_on_polynomial(self, grid):
        f = from_function(grid, lambda X, Y: Y**3 + 0 * X)
        Y = grid.mesh()[1]
        assert np.abs(d_dy(f).values() - 3 * Y**2).max() < 1e-11
        assert np.abs(d2_dy2(f).values() - 6 * Y).max() < 1e-9

    def test_integral_from_bottom(self, grid):
        f = from_function(grid, lambda X, Y: np.cos(np.pi * Y) + 0 * X)
        Y = grid.mesh()[1]
        assert np.abs(integral_y_from_0(f).values() - np.sin(np.pi * Y) / np.pi).max() < 1e-12

    def test_depth_mean(self, grid):
        f = from_function(grid, lambda X, Y: np.sin(np.pi * Y) * (1 + np.cos(X)))
        assert np.allclose(mean_y(f), 2 / np.pi * (1 + np.cos(grid.x)), atol=1e-12)

    def test_grid_mismatch(self):
        a = Field2D.zeros(GridSpec(Nx=16, Ny=9))
        b = Field2D.zeros(GridSpec(Nx=32, Ny=9))
        with pytest.raises(GridMismatchError):
            multiply(a, b)

    def test_dealiased_product_exact_for_resolved_modes(self, grid):
        k = 2 * np.pi / grid.Lx
        f = from_function(grid, lambda X, Y: np.cos(5 * k * X) + 0 * Y)
        g = from_function(grid, lambda X, Y: np.sin(7 * k * X) + 0 * Y)
        want = np.cos(5 * k * grid.mesh()[0]) * np.sin(7 * k * grid.mesh()[0])
        assert np.abs(multiply(f, g).values() - want).max() < 1e-13


class TestCutoffs:
    def test_bump_plateau_and_support(self):
        z = np.linspace(0, 2, 401)
        b = bump(z)
        assert np.all(b[z <= 0.75] == 1.0)
        assert np.all(b[z >= 4 / 3] == 0.0)
        assert np.all(np.diff(b) <= 0)

    @given(z=st.floats(1e-6, 1e6))
    def test_homogeneous_partition(self, z):
        s = sum(DEFAULT_CUTOFFS.phi(np.array(z) / 2.0**q) for q in range(-30, 30))
        assert abs(s - 1) <= 1e-12

    @given(z=st.floats(0, 1e6))
    def test_inhomogeneous_partition(self, z):
        s = DEFAULT_CUTOFFS.psi(np.array(z)) + sum(DEFAULT_CUTOFFS.phi(np.array(z) / 2.0**q) for q in range(0, 30))
        assert abs(s - 1) <= 1e-12

    def test_range_for_default_grid(self):
        assert dyadic_range(GridSpec(Nx=64, Ny=9)) == (-1, 5)

    @given(g=GRIDS)
    def test_table_sums_to_one(self, g):
        tab = dyadic_table(g)
        assert np.abs(tab.psi_low + tab.phi.sum(axis=0) - 1).max() <= 1e-12
        # the low block keeps only the horizontal mean
        assert np.all(tab.psi_low[1:] == 0) and tab.psi_low[0] == 1

    @given(g=GRIDS)
    def test_far_blocks_are_disjoint(self, g):
        tab = dyadic_table(g)
        for i, q in enumerate(tab.qs):
            for j, q2 in enumerate(tab.qs):
                if abs(q - q2) >= 2:
                    assert not np.any(tab.phi[i] * tab.phi[j])

    def test_out_of_range_block(self):
        g = GridSpec(Nx=64, Ny=9)
        f = Field2D.zeros(g)
        with pytest.raises(DyadicRangeError):
            dyadic_project(f, 9)
        with pytest.raises(DyadicRangeError):
            low_pass(f, -5)


class TestLadder:
    @given(g=GRIDS, seed=SEEDS)
    def test_reconstruction(self, g, seed):
        f = random_field(g, np.random.default_rng(seed))
        assert (ladder(f).reconstruct() - f).l2_norm() <= 1e-12 * f.l2_norm()

    @given(g=GRIDS, seed=SEEDS)
    def test_bernstein(self, g, seed):
        lad = ladder(random_field(g, np.random.default_rng(seed)))
        for q, b in lad.blocks.items():
            n = b.l2_norm()
            if n > 0:
                r = d_dx(b).l2_norm() / n
                assert 0.75 * 2.0**q <= r * (1 + 1e-12)
                assert r <= 8 / 3 * 2.0**q * (1 + 1e-12)

    def test_low_upto_matches_low_pass(self, rng):
        g = GridSpec(Nx=64, Ny=9)
        f = random_field(g, rng)
        lad = ladder(f)
        for q in range(lad.q_min + 1, lad.q_max + 1):
            assert (lad.low_upto(q) - low_pass(f, q)).l2_norm() < 1e-13 * f.l2_norm()

    def test_dirichlet_random_field_vanishes_at_walls(self, grid, rng):
        v = random_field(grid, rng, dirichlet=True).values()
        assert np.abs(v[:, 0]).max() < 1e-13 and np.abs(v[:, -1]).max() < 1e-13
