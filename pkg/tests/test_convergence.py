"""Remainder, forcing identity, paired runs and the eps sweep."""

import numpy as np
import pytest

from thinstrip.aniso import AnisoSolver
from thinstrip.band import AnalyticBandState
from thinstrip.catalog import initial_data
from thinstrip.convergence import (
    WORKERS_ENV, PairParams, TimeMismatchError, fit_slope, forcing_residual, refinement_gate, remainder, run_pair,
    sweep, worker_count,
)
from thinstrip.hydro import HydroSolver
from thinstrip.spectral import GridSpec

G = GridSpec(Nx=32, Ny=17)
SMALL = PairParams(Nx=16, Ny=17, data_params=(("amplitude", 0.01),), t_end=0.5)


def pair(eps=0.1, amplitude=0.05):
    u0, u1 = initial_data(G, "gauss-sine", {"amplitude": amplitude, "u1_factor": 0.3})
    a, h = AnisoSolver(G, eps), HydroSolver(G)
    sa = a.prepare_initial(u0, u1, AnalyticBandState(0.5, 1.0, "tau"))
    sh = h.initial_state(u0, u1, AnalyticBandState(0.5, 1.0))
    return a, h, sa, sh


class TestRemainder:
    def test_well_prepared_start(self):
        _, _, sa, sh = pair()
        for r in remainder(sa, sh):
            assert r.l2_norm() < 1e-15

    def test_time_stamps_must_match(self):
        a, _, sa, sh = pair()
        sa = a.step(sa, 0.001)
        with pytest.raises(TimeMismatchError):
            remainder(sa, sh)

    @pytest.mark.parametrize("eps", [0.2, 0.05])
    def test_forcing_identity(self, eps):
        a, h, sa, sh = pair(eps)
        dt = a.dt_max(sa)
        for _ in range(10):
            sa, sh = a.step(sa, dt), h.step(sh, dt)
        res = forcing_residual(sa, sh, aniso_solver=a, hydro_solver=h)
        assert res.relative < 1e-9
        assert res.F1.l2_norm() > 0


class TestSweep:
    def test_fit_slope_recovers_power(self):
        eps = [0.1, 0.05, 0.025]
        slope, icpt, resid = fit_slope(eps, [3 * e**1.5 for e in eps])
        assert slope == pytest.approx(1.5) and np.exp(icpt) == pytest.approx(3.0) and resid < 1e-12

    def test_sweep_arguments(self):
        with pytest.raises(ValueError):
            sweep(SMALL, [0.1, 0.05])
        with pytest.raises(ValueError):
            sweep(SMALL, [0.05, 0.1, 0.025])

    def test_run_pair_records(self):
        rec = run_pair(SMALL, 0.1)
        assert rec.failed is None
        assert rec.steps == len(rec.instant) - 1
        assert rec.terminal > 0 and rec.initial_functional < 1e-15
        assert rec.eta_final < rec.eta_limit

    def test_linear_sweep_slope(self):
        # linear dynamics with well-prepared data: the remainder is forced at O(eps^2)
        res = sweep(PairParams(Nx=16, Ny=17, data_params=(("amplitude", 0.01),), t_end=0.5, nonlinear=False),
                    [0.2, 0.1, 0.05])
        assert 1.8 <= res.slope <= 2.2

    def test_worker_count_does_not_change_results(self):
        eps = [0.2, 0.1, 0.05]
        one = sweep(SMALL, eps, workers=1)
        two = sweep(SMALL, eps, workers=2)
        assert one.norms == two.norms

    def test_gate_is_stable(self):
        gate = refinement_gate(SMALL, eps=0.2)
        assert gate.passed and gate.relative_change < 0.1


class TestWorkers:
    def test_env(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "3")
        assert worker_count() == 3
        monkeypatch.delenv(WORKERS_ENV)
        assert worker_count() == 1

    def test_bad_env(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "0")
        with pytest.raises(ValueError):
            worker_count()
