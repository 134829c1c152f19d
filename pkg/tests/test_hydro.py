"""Hydrostatic solver: diagnosed v, pressure, modal accuracy and conservation."""

import numpy as np
import pytest

from thinstrip.acceptance import modal_errors
from thinstrip.band import AnalyticBandState, BandExhaustedError
from thinstrip.catalog import initial_data
from thinstrip.hydro import (
    BlowUpError, CompatibilityError, HydroSolver, enforce_compatibility, pressure_gradient, recover_v,
)
from thinstrip._interior import StepSizeError
from thinstrip.spectral import Field2D, GridSpec, d_dx, d_dy, from_function, mean_y_coeffs, random_field

G = GridSpec(Nx=32, Ny=17)


def data(amplitude=0.05, grid=G):
    return initial_data(grid, "gauss-sine", {"amplitude": amplitude, "u1_factor": 0.3})


def band(a=0.5, rate=1.0):
    return AnalyticBandState(a=a, rate=rate)


class TestDiagnostics:
    def test_v_from_incompressibility(self, rng):
        g = GridSpec(Nx=32, Ny=33)  # resolves the sine profiles to roundoff
        u0, _ = enforce_compatibility(random_field(g, rng, dirichlet=True), Field2D.zeros(g))
        v = recover_v(u0)
        assert (d_dx(u0) + d_dy(v)).l2_norm() < 1e-10 * u0.l2_norm()
        assert np.abs(v.values()[:, [0, -1]]).max() < 1e-12

    def test_incompatible_u_is_refused(self):
        u = from_function(G, lambda X, Y: np.cos(X) * Y * (1 - Y))
        with pytest.raises(CompatibilityError):
            recover_v(u)

    def test_corrector_keeps_wall_values(self, rng):
        f = random_field(G, rng, dirichlet=True)
        g, _ = enforce_compatibility(f, f)
        assert np.abs(mean_y_coeffs(g)).max() < 1e-14
        assert np.abs(g.values()[:, [0, -1]]).max() < 1e-13

    def test_pressure_forms_agree_without_advection(self):
        u = from_function(G, lambda X, Y: np.sin(np.pi * Y) ** 2 + 0 * X)
        a = pressure_gradient(u, "conservative").values()
        b = pressure_gradient(u, "wall-shear").values()
        assert np.abs(a - b).max() < 1e-10

    def test_pressure_forms_close_for_smooth_data(self):
        u0, _ = data(0.5, GridSpec(Nx=32, Ny=33))
        a = pressure_gradient(u0, "conservative")
        b = pressure_gradient(u0, "wall-shear")
        assert (a - b).l2_norm() < 1e-6 * a.l2_norm()

    def test_unknown_pressure_form(self):
        with pytest.raises(ValueError):
            pressure_gradient(Field2D.zeros(G), "hydrostatic")


class TestStepping:
    def test_modal_second_order(self):
        e = modal_errors()
        for r in (e[0] / e[1], e[1] / e[2]):
            assert 3.6 <= r <= 4.4

    def test_depth_mean_is_preserved(self):
        s = HydroSolver(G)
        st = s.initial_state(*data(), band())
        dt = 0.01
        for _ in range(100):
            st = s.step(st, dt)
        assert np.abs(mean_y_coeffs(st.u)).max() < 1e-13
        assert np.abs(mean_y_coeffs(st.ut)).max() < 1e-13

    def test_linear_energy_decays(self):
        s = HydroSolver(G, nonlinear=False)
        st = s.initial_state(*data(1.0), band(rate=1e-6))

        def energy(x):
            return 0.5 * x.ut.l2_norm() ** 2 + 0.5 * d_dy(x.u).l2_norm() ** 2

        e = [energy(st)]
        for _ in range(100):
            st = s.step(st, 0.02)
            e.append(energy(st))
        assert all(b <= a * (1 + 1e-10) for a, b in zip(e, e[1:]))
        assert e[-1] < 0.5 * e[0]

    def test_rhs_is_the_acceleration(self):
        s = HydroSolver(G)
        st = s.initial_state(*data(0.2), band())
        acc = s.rhs(st)
        dt = 1e-5
        fd = (s.step(st, dt).ut - st.ut) * (1 / dt)
        inner = (slice(None), slice(1, -1))
        err = np.abs(fd.coeffs[inner] - acc.coeffs[inner]).max()
        assert err < 1e-3 * np.abs(acc.coeffs).max()
        # conservative pressure: depth integral of u_tt balances u_t
        w = G.vops.weights
        assert np.abs(acc.coeffs @ w + st.ut.coeffs @ w).max() < 1e-13

    def test_step_limit(self):
        s = HydroSolver(G)
        st = s.initial_state(*data(), band())
        with pytest.raises(StepSizeError):
            s.step(st, 2 * s.dt_max(st))
        with pytest.raises(StepSizeError):
            s.step(st, 0.0)

    def test_blow_up_reported(self):
        s = HydroSolver(G)
        st = s.initial_state(*data(), band())
        st.ut.coeffs[1, 3] = np.nan
        with pytest.raises(BlowUpError):
            s.step(st, 0.01, check_dt=False)

    def test_band_exhaustion_carries_state(self):
        s = HydroSolver(G)
        st = s.initial_state(*data(0.5), band(a=0.05))
        with pytest.raises(BandExhaustedError) as info:
            for _ in range(200):
                st = s.step(st, 0.01)
        assert info.value.crossing_time is not None
        assert info.value.state.band.width < 0
