"""Hydrostatic hyperbolic system on the strip.

    u_tt + u_t + u u_x + v u_y - u_yy + p_x = 0,   p_y = 0,
    u_x + v_y = 0,   u = v = 0 at y = 0, 1,

with ``v = -int_0^y u_x`` diagnosed and ``p_x`` eliminated by integrating the
momentum equation over the depth.  The pressure force is the y-independent
field that keeps the depth mean of ``u`` at zero; on interior collocation rows
it equals the weighted vertical mean of ``u_yy - u u_x - v u_y``, which is the
wall-shear formula after one integration by parts.  Its horizontal mean is
kept as a spatially constant force.

Time stepping is Strang splitting: half a Crank-Nicolson step of the linear
damped wave operator, a full nonlinear kick, another linear half step.  The
nonlinear kick only changes ``u_t`` and depends on ``u`` alone, so it is
integrated exactly and the scheme is second order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from thinstrip._interior import (
    BlowUpError,
    CompatibilityError,
    Interior,
    StepSizeError,
    check_finite,
    crank_nicolson,
)
from thinstrip.band import AnalyticBandState, BandExhaustedError, check_weight_range, step_clock
from thinstrip.besov import besov_total_from_energy, mode_energy
from thinstrip.spectral import Field2D, GridSpec, d_dx, integral_y_from_0, mean_y_coeffs

__all__ = [
    "BlowUpError",
    "CompatibilityError",
    "HydroSolver",
    "HydroState",
    "enforce_compatibility",
    "pressure_gradient",
    "recover_v",
]

MEAN_TOL = 1e-8


@dataclass
class HydroState:
    u: Field2D
    ut: Field2D
    t: float
    band: AnalyticBandState

    @property
    def grid(self) -> GridSpec:
        return self.u.grid


def _mean_scale(f: Field2D) -> float:
    return max(1.0, float(np.abs(f.coeffs).max(initial=0.0)))


def recover_v(u: Field2D, tol: float = MEAN_TOL) -> Field2D:
    """Vertical velocity from incompressibility and ``v = 0`` at ``y = 0``."""
    m = mean_y_coeffs(u)
    m[0] = 0.0  # the horizontal mean does not enter d_x u
    if np.abs(m).max() > tol * _mean_scale(u):
        raise CompatibilityError(f"depth mean of u is {np.abs(m).max():.3e}; need int_0^1 u dy = 0")
    return -integral_y_from_0(d_dx(u))


def _compat_profile(grid: GridSpec) -> np.ndarray:
    y = grid.y
    prof = 6.0 * y * (1.0 - y)
    return prof / (grid.vops.weights @ prof)


def enforce_compatibility(u0: Field2D, u1: Field2D) -> tuple[Field2D, Field2D]:
    """Remove the depth mean with the corrector ``6 y (1 - y)``."""
    prof = _compat_profile(u0.grid)

    def fix(f: Field2D) -> Field2D:
        return Field2D(f.grid, f.coeffs - np.outer(mean_y_coeffs(f), prof))

    return fix(u0), fix(u1)


def pressure_gradient(u: Field2D, form: str = "conservative") -> Field2D:
    """The y-independent field ``p_x``.

    ``form="wall-shear"`` evaluates ``u_y(1) - u_y(0) - d_x int_0^1 u^2 dy``
    literally; ``"conservative"`` takes the depth integral of
    ``u_yy - u u_x - v u_y`` with the grid quadrature.  The viscous parts agree
    exactly on the Chebyshev grid; the advective parts agree up to vertical
    discretisation error.
    """
    ops = Interior(u.grid)
    c = u.coeffs
    if form == "wall-shear":
        uy = ops.dy(c)
        sq = ops.mul(c, c) @ ops.w
        px = uy[:, -1] - uy[:, 0] - ops.ddx * sq
    elif form == "conservative":
        v = ops.diagnose_v(c)
        rest = ops.dyy(c) - ops.advection(c, v, c)
        px = rest @ ops.w
    else:
        raise ValueError(f"unknown pressure form {form!r}")
    return Field2D(u.grid, np.repeat(px[:, None], u.grid.Ny, axis=1))


def theta_driver(u: np.ndarray, grid: GridSpec, width: float, ops: Interior) -> float:
    """``|| e^{width |D_x|} d_y u ||_{B^{1/2}}``."""
    e = mode_energy([ops.dy(u)], grid) * np.exp(2.0 * width * grid.abs_xi)
    return besov_total_from_energy(e, grid, 0.5)


class HydroSolver:
    """Owner of the precomputed linear propagators for one grid.

    ``nonlinear=False`` drops ``u u_x + v u_y``; ``pressure=False`` drops the
    pressure force as well (pure damped wave equation per vertical mode).
    """

    def __init__(self, grid: GridSpec, *, nonlinear: bool = True, pressure: bool = True,
                 dt_safety: float = 0.25):
        self.grid = grid
        self.nonlinear = nonlinear
        self.pressure = pressure
        self.dt_safety = dt_safety
        self.ops = Interior(grid)
        D2 = self.ops.D2[1:-1, 1:-1]
        self.L = self.ops.proj @ D2 if pressure else D2.copy()
        self._prop_cache: dict[float, np.ndarray] = {}

    # -- state helpers -----------------------------------------------------

    def initial_state(self, u0: Field2D, u1: Field2D, band: AnalyticBandState) -> HydroState:
        check_weight_range(self.grid, band.a)
        c0, c1 = u0.coeffs.copy(), u1.coeffs.copy()
        for c in (c0, c1):
            c[self.grid.nyquist] = 0.0
            c[:, 0] = 0.0
            c[:, -1] = 0.0
        return HydroState(Field2D(self.grid, c0), Field2D(self.grid, c1), 0.0, band)

    def _propagator(self, h: float) -> np.ndarray:
        P = self._prop_cache.get(h)
        if P is None:
            n = self.ops.n
            M = np.zeros((2 * n, 2 * n))
            M[:n, n:] = np.eye(n)
            M[n:, :n] = self.L
            M[n:, n:] = -np.eye(n)
            P = crank_nicolson(M, h)
            self._prop_cache = {h: P}
        return P

    def dt_max(self, state: HydroState) -> float:
        umax = float(np.abs(state.u.values()).max())
        dx = self.grid.Lx / self.grid.Nx
        return self.dt_safety * min(dx / umax if umax > 0 else np.inf, 1.0)

    # -- physics -----------------------------------------------------------

    def nonlinear_accel(self, u: np.ndarray) -> np.ndarray:
        """Interior contribution ``-(u u_x + v u_y) - p_x`` of the advection."""
        ops = self.ops
        if not self.nonlinear:
            return np.zeros((self.grid.Nx, ops.n), dtype=complex)
        v = ops.diagnose_v(u)
        N = ops.advection(u, v, u)[:, 1:-1]
        return -ops.project(N) if self.pressure else -N

    def rhs(self, state: HydroState) -> Field2D:
        """``u_tt`` from the equation, evaluated on every row including the walls.

        The pressure force is the conservative form, so the depth integral of
        the result is exactly ``-int_0^1 u_t dy``.  The stepper instead pins the
        wall rows and applies the same force as an interior projection.
        """
        ops = self.ops
        u, w = state.u.coeffs, state.ut.coeffs
        a = -w + ops.dyy(u)
        if self.nonlinear:
            a = a - ops.advection(u, ops.diagnose_v(u), u)
        if self.pressure:
            a = a - (a + w) @ ops.w[:, None] * np.ones(self.grid.Ny)
        return Field2D(self.grid, a)

    def driver(self, state: HydroState) -> float:
        return theta_driver(state.u.coeffs, self.grid, state.band.width, self.ops)

    def step(self, state: HydroState, dt: float, check_dt: bool = True) -> HydroState:
        if dt <= 0:
            raise StepSizeError("dt must be positive")
        if check_dt and dt > self.dt_max(state) * (1 + 1e-12):
            raise StepSizeError(f"dt={dt} exceeds dt_max={self.dt_max(state):.4g}")
        n = self.ops.n
        P = self._propagator(0.5 * dt)
        z = np.concatenate([state.u.coeffs[:, 1:-1], state.ut.coeffs[:, 1:-1]], axis=1)
        z = z @ P.T
        u_mid = self.ops.full(z[:, :n])
        z[:, n:] += dt * self.nonlinear_accel(u_mid)
        band = state.band
        drv = theta_driver(u_mid, self.grid, band.width, self.ops) if band.width > 0 else 0.0
        z = z @ P.T
        t_new = state.t + dt
        check_finite(t_new, z)
        new = HydroState(Field2D(self.grid, self.ops.full(z[:, :n])),
                         Field2D(self.grid, self.ops.full(z[:, n:])), t_new, band)
        step_clock(band, drv, dt)
        if band.exhausted_at is not None:
            err = BandExhaustedError(f"theta band exhausted at t={band.exhausted_at:.6g}", band.exhausted_at)
            err.state = new
            raise err
        return new
