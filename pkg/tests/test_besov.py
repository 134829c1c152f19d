"""Besov and Chemin-Lerner norms, Bony pieces and the vertical inequalities."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thinstrip.besov import (
    LadderRangeError, agmon_ratio, besov_norm, bony_decompose, cl_total, cl_update, new_accumulator, poincare_ratio,
)
from thinstrip.energy import poincare_constant
from thinstrip.spectral import GridSpec, from_function, multiply, random_field

SEEDS = st.integers(0, 2**32 - 1)
G64 = GridSpec(Nx=64, Ny=17)


def single_mode():
    # cos(3x) sin(pi y): only block q = 1 sees xi = 3, with norm 1/2
    return from_function(G64, lambda X, Y: np.cos(3 * X) * np.sin(np.pi * Y))


class TestBesov:
    @pytest.mark.parametrize("s", [-1.0, 0.0, 0.5, 1.5, 3.0])
    def test_single_mode_value(self, s):
        rep = besov_norm(single_mode(), s)
        # transform roundoff leaks ~1e-16 into the other blocks
        assert rep.total == pytest.approx(2.0**s * 0.5, rel=1e-11)
        assert rep.low < 1e-15

    def test_mean_block_enters_with_unit_weight(self):
        f = from_function(G64, lambda X, Y: np.sin(np.pi * Y) + 0 * X)
        rep = besov_norm(f, 0.5)
        assert rep.total == pytest.approx(np.sqrt(0.5), rel=1e-12)

    def test_index_range(self):
        with pytest.raises(ValueError):
            besov_norm(single_mode(), 4.5)

    def test_vector_field_norm(self):
        f = single_mode()
        assert besov_norm([f, f * 0.0], 0.5).total == pytest.approx(besov_norm(f, 0.5).total)

    @given(seed=SEEDS)
    def test_triangle_inequality(self, seed):
        r = np.random.default_rng(seed)
        f, g = random_field(G64, r), random_field(G64, r)
        assert besov_norm(f + g, 0.5).total <= besov_norm(f, 0.5).total + besov_norm(g, 0.5).total + 1e-12


class TestCheminLerner:
    def test_separable_in_time(self):
        f = single_mode()
        ts = np.linspace(0, 1, 11)[1:]
        dt = 0.1
        inf = new_accumulator(G64, 0.5, np.inf)
        two = new_accumulator(G64, 0.5, 2)
        for t in ts:
            cl_update(inf, f * np.exp(-t), t, dt)
            cl_update(two, f * np.exp(-t), t, dt)
        base = besov_norm(f, 0.5).total
        assert cl_total(inf, G64) == pytest.approx(np.exp(-0.1) * base, rel=1e-12)
        assert cl_total(two, G64) == pytest.approx(np.sqrt(dt * np.sum(np.exp(-2 * ts))) * base, rel=1e-12)

    @given(seed=SEEDS)
    def test_dominates_time_norm_of_besov(self, seed):
        r = np.random.default_rng(seed)
        inf = new_accumulator(G64, 0.5, np.inf)
        worst = 0.0
        for k in range(5):
            f = random_field(G64, r)
            cl_update(inf, f, 0.1 * (k + 1), 0.1)
            worst = max(worst, besov_norm(f, 0.5).total)
        assert worst <= cl_total(inf, G64) * (1 + 1e-12)

    def test_time_must_advance(self):
        acc = new_accumulator(G64, 0.5, 2)
        cl_update(acc, single_mode(), 1.0, 0.1)
        with pytest.raises(ValueError):
            cl_update(acc, single_mode(), 0.5, 0.1)

    def test_only_two_and_inf(self):
        with pytest.raises(ValueError):
            new_accumulator(G64, 0.5, 3)


class TestBony:
    @given(seed=SEEDS)
    def test_reassembles_product(self, seed):
        r = np.random.default_rng(seed)
        f, g = random_field(G64, r), random_field(G64, r)
        Tfg, Tgf, R = bony_decompose(f, g)
        prod = multiply(f, g)
        assert (Tfg + Tgf + R - prod).l2_norm() <= 1e-10 * prod.l2_norm()

    def test_truncated_range_is_refused(self, rng):
        f = random_field(G64, rng)
        with pytest.raises(LadderRangeError):
            bony_decompose(f, f, q_range=(0, 2))


class TestVertical:
    def test_poincare_eigenvalue(self):
        assert poincare_constant(GridSpec(Nx=8, Ny=64)) == pytest.approx(np.pi**2, abs=1e-8)

    def test_poincare_ratio_for_first_mode(self):
        g = GridSpec(Nx=8, Ny=64)
        assert poincare_ratio(np.sin(np.pi * g.y), g) == pytest.approx(1 / np.pi, rel=1e-10)

    @given(coef=st.lists(st.floats(-1, 1), min_size=8, max_size=8).filter(lambda c: max(map(abs, c)) > 1e-3))
    def test_agmon_bound(self, coef):
        g = GridSpec(Nx=8, Ny=64)
        prof = np.sin(np.pi * np.outer(g.y, np.arange(1, 9))) @ np.asarray(coef)
        assert agmon_ratio(prof, g) <= np.sqrt(2) * (1 + 1e-6)
        assert poincare_ratio(prof, g) <= 1 / np.pi * (1 + 1e-8)
