"""Anisotropic (eps-scaled) hyperbolic Navier-Stokes on the strip.

    u_tt + u_t + u u_x + v u_y - eps^2 u_xx - u_yy + p_x = 0
    eps^2 (v_tt + v_t + u v_x + v v_y - eps^2 v_xx - v_yy) + p_y = 0
    u_x + v_y = 0,   u = v = 0 at y = 0, 1.

The pressure is the per-mode solution of the Neumann problem obtained by
taking the divergence of the momentum pair,

    -xi^2 p + eps^-2 p_yy = i xi g_u + d_y g_v,   p_y = eps^2 g_v at the walls,

where ``(g_u, g_v)`` are the non-pressure accelerations.  On divergence-free
states this is the Poisson problem with right side ``-div N`` and wall data
``eps^2 v_yy``, and it makes the returned accelerations divergence free.

Steps evolve ``(u, u_t)`` only; ``v`` and ``v_t`` are re-diagnosed from
incompressibility after every step, which is divergence cleaning with period
one.  The horizontal mean (``xi = 0``) carries a y-independent channel force
that keeps ``int_0^1 u dy = 0``, exactly as in the hydrostatic solver.
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
from thinstrip.hydro import recover_v
from thinstrip.spectral import Field2D, GridSpec

__all__ = [
    "AnisoSolver",
    "AnisoState",
    "BlowUpError",
    "CompatibilityError",
    "PressureReport",
    "divergence",
]


@dataclass
class AnisoState:
    u: Field2D
    ut: Field2D
    v: Field2D
    vt: Field2D
    t: float
    eps: float
    band: AnalyticBandState

    @property
    def grid(self) -> GridSpec:
        return self.u.grid


@dataclass(frozen=True)
class PressureReport:
    p: Field2D
    px: Field2D
    py: Field2D
    compat_residual: float  # Lagrange multiplier of the xi = 0 gauge system


def divergence(u: Field2D, v: Field2D) -> Field2D:
    ops = Interior(u.grid)
    return Field2D(u.grid, ops.dx(u.coeffs) + ops.dy(v.coeffs))


class AnisoSolver:
    """Precomputed per-mode pressure inverses and linear propagators for one (grid, eps)."""

    def __init__(self, grid: GridSpec, eps: float, *, nonlinear: bool = True, dt_safety: float = 0.25,
                 pressure_cfl: float = 0.5):
        if not (0 < eps <= 1):
            raise ValueError(f"eps must lie in (0, 1], got {eps}")
        self.grid = grid
        self.eps = float(eps)
        self.nonlinear = nonlinear
        self.dt_safety = dt_safety
        self.pressure_cfl = pressure_cfl
        self.ops = Interior(grid)
        self.m_half = grid.Nx // 2  # modes 0..Nx/2-1; the Nyquist mode is frozen at zero
        self._poisson_inv = [self._poisson_inverse(m) for m in range(self.m_half)]
        self._A, self._B = self._linear_blocks()
        self._prop_cache: dict[float, np.ndarray] = {}

    # -- pressure ------------------------------------------------------------

    def _poisson_matrix(self, m: int) -> np.ndarray:
        ops, e2 = self.ops, self.eps**2
        xi = float(self.grid.xi[m])
        Ny = self.grid.Ny
        A = -xi**2 * np.eye(Ny) + ops.D2 / e2
        A[0] = ops.D[0]
        A[-1] = ops.D[-1]
        return A

    def _poisson_inverse(self, m: int) -> np.ndarray:
        A = self._poisson_matrix(m)
        if m != 0:
            return np.linalg.inv(A)
        # bordered gauge system: zero weighted mean, multiplier absorbs the compatibility residual
        Ny = self.grid.Ny
        Z = np.zeros((Ny + 1, Ny + 1))
        Z[:Ny, :Ny] = A
        Z[:Ny, Ny] = 1.0
        Z[Ny, :Ny] = self.ops.w
        return np.linalg.inv(Z)

    def _solve_modes(self, b: np.ndarray) -> tuple[np.ndarray, float]:
        """Apply the per-mode inverses to right sides ``b`` of shape (Nx, Ny)."""
        Nx, Ny = b.shape
        p = np.zeros_like(b, dtype=complex)
        Z0 = self._poisson_inv[0]
        sol = Z0 @ np.concatenate([b[0], [0.0]])
        p[0] = sol[:Ny]
        resid = float(abs(sol[Ny]))
        for m in range(1, self.m_half):
            inv = self._poisson_inv[m]
            p[m] = inv @ b[m]
            p[-m] = inv @ b[-m]
        return p, resid

    def _poisson_rhs(self, gu: np.ndarray, gv: np.ndarray) -> np.ndarray:
        ops, e2 = self.ops, self.eps**2
        b = ops.dx(gu) + ops.dy(gv)
        b[:, 0] = e2 * gv[:, 0]
        b[:, -1] = e2 * gv[:, -1]
        return b

    def solve_pressure_modes(self, rhs: np.ndarray, flux_bottom: np.ndarray, flux_top: np.ndarray):
        """Solve ``-xi^2 p + eps^-2 p_yy = rhs`` with ``p_y`` prescribed at the walls.

        Returns ``(p, residual)``; ``p`` has zero weighted y-mean at ``xi = 0``.
        """
        b = np.array(rhs, dtype=complex)
        b[:, 0] = flux_bottom
        b[:, -1] = flux_top
        return self._solve_modes(b)

    # -- linear part ------------------------------------------------------------

    def _linear_blocks(self):
        """Per-mode interior matrices with ``u_tt = A u + B u_t`` in the linear regime."""
        ops, e2 = self.ops, self.eps**2
        n, Ny = ops.n, self.grid.Ny
        E = np.zeros((Ny, n))
        E[1:-1] = np.eye(n)
        mean_row = np.outer(np.ones(n), ops.w_int) / ops.w_sum
        A = np.zeros((self.m_half, n, n), dtype=complex)
        B = np.zeros((self.m_half, n, n), dtype=complex)
        for m in range(self.m_half):
            xi = float(self.grid.xi[m])
            K = ops.D2 - e2 * xi**2 * np.eye(Ny)
            Vop = -1j * xi * ops.I0 @ E
            Gu_u, Gu_w = K @ E, -E
            Gv_u, Gv_w = K @ Vop, -Vop
            if m == 0:
                au, aw = Gu_u[1:-1], Gu_w[1:-1]
            else:
                inv = self._poisson_inv[m]

                def press(Gu, Gv):
                    b = 1j * xi * Gu + ops.D @ Gv
                    b[0] = e2 * Gv[0]
                    b[-1] = e2 * Gv[-1]
                    return inv @ b

                au = (Gu_u - 1j * xi * press(Gu_u, Gv_u))[1:-1]
                aw = (Gu_w - 1j * xi * press(Gu_w, Gv_w))[1:-1]
            A[m] = ops.proj @ au
            B[m] = ops.proj @ aw - mean_row
        return A, B

    def _propagator(self, h: float) -> np.ndarray:
        P = self._prop_cache.get(h)
        if P is None:
            n = self.ops.n
            M = np.zeros((self.m_half, 2 * n, 2 * n), dtype=complex)
            M[:, :n, n:] = np.eye(n)
            M[:, n:, :n] = self._A
            M[:, n:, n:] = self._B
            half = crank_nicolson(M, h)
            P = np.zeros((self.grid.Nx, 2 * n, 2 * n), dtype=complex)
            P[: self.m_half] = half
            P[self.m_half + 1:] = np.conj(half[1:][::-1])
            self._prop_cache = {h: P}
        return P

    # -- state helpers ----------------------------------------------------------

    def prepare_initial(self, u0: Field2D, u1: Field2D, band: AnalyticBandState) -> AnisoState:
        check_weight_range(self.grid, band.a)
        c0, c1 = u0.coeffs.copy(), u1.coeffs.copy()
        for c in (c0, c1):
            c[self.grid.nyquist] = 0.0
            c[:, 0] = 0.0
            c[:, -1] = 0.0
        u0, u1 = Field2D(self.grid, c0), Field2D(self.grid, c1)
        return AnisoState(u0, u1, recover_v(u0), recover_v(u1), 0.0, self.eps, band)

    def _state_from(self, u: np.ndarray, ut: np.ndarray, t: float, band) -> AnisoState:
        ops, g = self.ops, self.grid
        return AnisoState(Field2D(g, u), Field2D(g, ut), Field2D(g, ops.diagnose_v(u)),
                          Field2D(g, ops.diagnose_v(ut)), t, self.eps, band)

    def dt_max(self, state: AnisoState) -> float:
        umax = float(np.abs(state.u.values()).max())
        dx = self.grid.Lx / self.grid.Nx
        hydro = self.dt_safety * min(dx / umax if umax > 0 else np.inf, 1.0)
        xi_max = float(self.grid.abs_xi.max())
        return min(hydro, self.pressure_cfl * self.eps / xi_max)

    # -- physics ----------------------------------------------------------------

    def _nonlinear(self, u: np.ndarray, v: np.ndarray):
        ops = self.ops
        return ops.advection(u, v, u), ops.advection(u, v, v)

    def pressure_solve(self, state: AnisoState) -> PressureReport:
        """Pressure of the full momentum pair for the given state."""
        gu, gv = self._accelerations_wo_pressure(state)
        p, resid = self._solve_modes(self._poisson_rhs(gu, gv))
        ops, g = self.ops, self.grid
        return PressureReport(Field2D(g, p), Field2D(g, ops.dx(p)), Field2D(g, ops.dy(p)), resid)

    def _accelerations_wo_pressure(self, state: AnisoState):
        ops, e2 = self.ops, self.eps**2
        u, ut, v, vt = (f.coeffs for f in (state.u, state.ut, state.v, state.vt))
        xi2 = (self.grid.xi**2)[:, None]
        gu = -ut + ops.dyy(u) - e2 * xi2 * u
        gv = -vt + ops.dyy(v) - e2 * xi2 * v
        if self.nonlinear:
            N1, N2 = self._nonlinear(u, v)
            gu, gv = gu - N1, gv - N2
        return gu, gv

    def rhs(self, state: AnisoState) -> tuple[Field2D, Field2D]:
        """``(u_tt, v_tt)`` from the equations, evaluated on every row including the walls.

        The pair is divergence free up to the pressure solve.  The horizontal
        mean of ``u_tt`` carries the channel force that makes its depth integral
        equal ``-int_0^1 u_t dy``.  The stepper pins the wall rows instead.
        """
        ops, g = self.ops, self.grid
        gu, gv = self._accelerations_wo_pressure(state)
        p, _ = self._solve_modes(self._poisson_rhs(gu, gv))
        au = gu - ops.dx(p)
        au[0] -= (au[0] + state.ut.coeffs[0]) @ ops.w
        av = gv - ops.dy(p) / self.eps**2
        return Field2D(g, au), Field2D(g, av)

    def nonlinear_accel(self, u: np.ndarray) -> np.ndarray:
        ops = self.ops
        if not self.nonlinear:
            return np.zeros((self.grid.Nx, ops.n), dtype=complex)
        v = ops.diagnose_v(u)
        N1, N2 = self._nonlinear(u, v)
        p, _ = self._solve_modes(self._poisson_rhs(-N1, -N2))
        return ops.project((-N1 - ops.dx(p))[:, 1:-1])

    def driver(self, u: np.ndarray, width: float) -> float:
        """``||d_y u_Theta||_{B^{1/2}} + eps ||d_y v_Theta||_{B^{1/2}}``."""
        ops, g = self.ops, self.grid
        wgt = np.exp(2.0 * width * g.abs_xi)
        v = ops.diagnose_v(u)
        eu = mode_energy([ops.dy(u)], g) * wgt
        ev = mode_energy([ops.dy(v)], g) * wgt
        return besov_total_from_energy(eu, g, 0.5) + self.eps * besov_total_from_energy(ev, g, 0.5)

    def step(self, state: AnisoState, dt: float, check_dt: bool = True) -> AnisoState:
        if dt <= 0:
            raise StepSizeError("dt must be positive")
        if check_dt and dt > self.dt_max(state) * (1 + 1e-12):
            raise StepSizeError(f"dt={dt} exceeds dt_max={self.dt_max(state):.4g}")
        n = self.ops.n
        P = self._propagator(0.5 * dt)
        z = np.concatenate([state.u.coeffs[:, 1:-1], state.ut.coeffs[:, 1:-1]], axis=1)
        z = np.einsum("mij,mj->mi", P, z)
        u_mid = self.ops.full(z[:, :n])
        z[:, n:] += dt * self.nonlinear_accel(u_mid)
        band = state.band
        drv = self.driver(u_mid, band.width) if band.width > 0 else 0.0
        z = np.einsum("mij,mj->mi", P, z)
        t_new = state.t + dt
        check_finite(t_new, z)
        new = self._state_from(self.ops.full(z[:, :n]), self.ops.full(z[:, n:]), t_new, band)
        step_clock(band, drv, dt)
        if band.exhausted_at is not None:
            err = BandExhaustedError(f"tau band exhausted at t={band.exhausted_at:.6g}", band.exhausted_at)
            err.state = new
            raise err
        return new

    def energy(self, state: AnisoState) -> float:
        """``E_eps`` of the linear problem."""
        ops, g, e2 = self.ops, self.grid, self.eps**2
        u, ut, v, vt = (f.coeffs for f in (state.u, state.ut, state.v, state.vt))
        terms = mode_energy([ut, vt, ops.dy(u), ops.dy(v), ops.dx(u), ops.dx(v)], g,
                            scale=[1.0, self.eps, 1.0, self.eps, self.eps, e2])
        return 0.5 * float(terms.sum())
