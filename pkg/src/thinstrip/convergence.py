"""Paired anisotropic / hydrostatic runs and the eps-convergence of their remainder.

The remainder is ``(R1, R2) = (u^eps - u, v^eps - v)``.  Along a paired run the
remainder groupings are weighted by ``exp((a - mu eta) |D_x|)`` where the eta
clock is driven by both solutions, and folded into Chemin-Lerner totals.  The
terminal functional is the ``L~^inf_t(B^{1/2})`` part of the remainder estimate
at the final time.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from thinstrip._interior import BlowUpError, Interior, StepSizeError
from thinstrip.aniso import AnisoSolver, AnisoState
from thinstrip.band import AnalyticBandState, BandExhaustedError, step_clock
from thinstrip.besov import besov_total_from_energy, cl_total, mode_energy, new_accumulator
from thinstrip.catalog import initial_data
from thinstrip.energy import TermSpec, fold_terms
from thinstrip.hydro import HydroSolver, HydroState
from thinstrip.spectral import Field2D, GridMismatchError, GridSpec

WORKERS_ENV = "THINSTRIP_WORKERS"


class TimeMismatchError(ValueError):
    pass


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw == "":
        return default
    n = int(raw)
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


# ---------------------------------------------------------------------------
# remainder and forcing
# ---------------------------------------------------------------------------


def _check_pair(aniso: AnisoState, hydro: HydroState):
    if aniso.grid != hydro.grid:
        raise GridMismatchError("anisotropic and hydrostatic states live on different grids")
    if abs(aniso.t - hydro.t) > 1e-12 * max(1.0, abs(aniso.t)):
        raise TimeMismatchError(f"time stamps differ: {aniso.t} vs {hydro.t}")


def remainder(aniso: AnisoState, hydro: HydroState) -> tuple[Field2D, Field2D, Field2D, Field2D]:
    """``(R1, R2, d_t R1, d_t R2)``; the hydrostatic ``v`` is diagnosed from ``u``."""
    _check_pair(aniso, hydro)
    ops = Interior(hydro.grid)
    g = hydro.grid
    v = Field2D(g, ops.diagnose_v(hydro.u.coeffs))
    vt = Field2D(g, ops.diagnose_v(hydro.ut.coeffs))
    return aniso.u - hydro.u, aniso.v - v, aniso.ut - hydro.ut, aniso.vt - vt


@dataclass(frozen=True)
class ForcingResidual:
    res1: Field2D
    res2: Field2D
    F1: Field2D
    F2: Field2D

    @property
    def relative(self) -> float:
        num = math.hypot(self.res1.l2_norm(), self.res2.l2_norm())
        den = math.hypot(self.F1.l2_norm(), self.F2.l2_norm())
        return num / den if den > 0 else num


def forcing_residual(aniso: AnisoState, hydro: HydroState, eps: float | None = None,
                     aniso_solver: AnisoSolver | None = None,
                     hydro_solver: HydroSolver | None = None) -> ForcingResidual:
    """Residuals of the remainder system with the forcings ``F1, F2``.

    Accelerations come from each solver's ``rhs`` and the pressures are the
    forces implied by them, so the residual certifies that the two discrete
    systems combine into the remainder system up to rounding.
    """
    _check_pair(aniso, hydro)
    g = hydro.grid
    eps = aniso.eps if eps is None else float(eps)
    asv = aniso_solver or AnisoSolver(g, eps)
    hsv = hydro_solver or HydroSolver(g)
    ops = Interior(g)
    e2 = eps * eps
    xi2 = (g.xi**2)[:, None]

    ue, ute, ve, vte = (f.coeffs for f in (aniso.u, aniso.ut, aniso.v, aniso.vt))
    u, ut = hydro.u.coeffs, hydro.ut.coeffs
    v, vt = ops.diagnose_v(u), ops.diagnose_v(ut)
    aue, ave = (f.coeffs for f in asv.rhs(aniso))
    au = hsv.rhs(hydro).coeffs
    av = ops.diagnose_v(au)

    zero = np.zeros_like(ue)
    N1e = ops.advection(ue, ve, ue) if asv.nonlinear else zero
    N2e = ops.advection(ue, ve, ve) if asv.nonlinear else zero
    N1 = ops.advection(u, v, u) if hsv.nonlinear else zero

    # pressure forces implied by the accelerations
    pxe = -aue - ute - N1e - e2 * xi2 * ue + ops.dyy(ue)
    pye = e2 * (-ave - vte - N2e - e2 * xi2 * ve + ops.dyy(ve))
    px = -au - ut - N1 + ops.dyy(u)

    R1, R2 = ue - u, ve - v
    R1t, R2t = ute - ut, vte - vt
    R1tt, R2tt = aue - au, ave - av
    qx, qy = pxe - px, pye

    F1 = -e2 * xi2 * u - (N1e - N1)
    F2 = -e2 * (av + vt + e2 * xi2 * v - ops.dyy(v) + N2e)

    lhs1 = R1tt + R1t + e2 * xi2 * R1 - ops.dyy(R1) + qx
    lhs2 = e2 * (R2tt + R2t + e2 * xi2 * R2 - ops.dyy(R2)) + qy
    return ForcingResidual(Field2D(g, lhs1 - F1), Field2D(g, lhs2 - F2), Field2D(g, F1), Field2D(g, F2))


def eta_clock_driver(aniso: AnisoState, hydro: HydroState) -> float:
    """``||(d_y u^eps, eps d_x u^eps)_Theta||_{B^{1/2}} + ||d_y u_phi||_{B^{1/2}}``.

    Each solution is weighted with its own band.
    """
    _check_pair(aniso, hydro)
    g = hydro.grid
    ops = Interior(g)
    wa = np.exp(2.0 * max(aniso.band.width, 0.0) * g.abs_xi)
    wh = np.exp(2.0 * max(hydro.band.width, 0.0) * g.abs_xi)
    ea = mode_energy([ops.dy(aniso.u.coeffs), ops.dx(aniso.u.coeffs)], g, [1.0, aniso.eps]) * wa
    eh = mode_energy([ops.dy(hydro.u.coeffs)], g) * wh
    return besov_total_from_energy(ea, g, 0.5) + besov_total_from_energy(eh, g, 0.5)


# ---------------------------------------------------------------------------
# paired runs
# ---------------------------------------------------------------------------


def remainder_terms(eps: float) -> list[TermSpec]:
    inf = np.inf
    return [
        TermSpec("sum_inf", 0.5, inf, (("R1+R1t", 1.0), ("R2+R2t", eps))),
        TermSpec("dy_inf", 1.0, inf, (("R1y", 1.0), ("R2y", eps))),
        TermSpec("dx_inf", eps, inf, (("R1x", 1.0), ("R2x", eps))),
        TermSpec("t_inf", 0.5, inf, (("R1t", 1.0), ("R2t", eps))),
        TermSpec("t_l2", 1.0, 2, (("R1t", 1.0), ("R2t", eps))),
        TermSpec("dy_l2", 1.0, 2, (("R1y", 1.0), ("R2y", eps))),
        TermSpec("dx_l2", eps, 2, (("R1x", 1.0), ("R2x", eps))),
    ]


TERMINAL_TERMS = ("sum_inf", "dy_inf", "dx_inf", "t_inf")


@dataclass(frozen=True)
class PairParams:
    """Everything that defines one paired run (picklable for worker processes)."""

    Lx: float = 2 * math.pi
    Nx: int = 64
    Ny: int = 33
    vertical_scheme: str = "chebyshev"
    data: str = "gauss-sine"
    data_params: tuple = ()
    a: float = 0.5
    lam: float = 1.0
    mu: float = 1.0
    t_end: float = 1.0
    dt: float | None = None
    nonlinear: bool = True
    ill_prepared: float = 0.0  # size of an explicit perturbation of the anisotropic data

    def grid(self) -> GridSpec:
        return GridSpec(Lx=self.Lx, Nx=self.Nx, Ny=self.Ny, vertical_scheme=self.vertical_scheme)


@dataclass
class RemainderRecord:
    eps: float
    times: list[float] = field(default_factory=list)
    instant: list[dict] = field(default_factory=list)
    totals: dict = field(default_factory=dict)
    terminal: float = float("nan")
    eta_history: list[tuple[float, float]] = field(default_factory=list)
    eta_final: float = 0.0
    eta_limit: float = float("inf")  # a / (2 mu)
    initial_functional: float = 0.0
    steps: int = 0
    dt: float = 0.0
    failed: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _remainder_fields(ops: Interior, aniso: AnisoState, hydro: HydroState) -> dict:
    R1, R2, R1t, R2t = (f.coeffs for f in remainder(aniso, hydro))
    return {
        "R1+R1t": R1 + R1t, "R2+R2t": R2 + R2t, "R1t": R1t, "R2t": R2t,
        "R1y": ops.dy(R1), "R2y": ops.dy(R2), "R1x": ops.dx(R1), "R2x": ops.dx(R2),
    }


def _perturb(u: Field2D, size: float) -> Field2D:
    if size == 0:
        return u
    g = u.grid
    X, Y = g.mesh()
    from thinstrip.spectral import transform

    bump = transform(g, size * np.cos(2 * np.pi * X / g.Lx) * np.sin(2 * np.pi * Y))
    return u + bump


def run_pair(params: PairParams, eps: float, keep_instant: bool = True) -> RemainderRecord:
    """Run both systems on shared data up to ``t_end`` with a common fixed step."""
    g = params.grid()
    ops = Interior(g)
    u0, u1 = initial_data(g, params.data, dict(params.data_params))
    hs = HydroSolver(g, nonlinear=params.nonlinear)
    asv = AnisoSolver(g, eps, nonlinear=params.nonlinear)
    hst = hs.initial_state(u0, u1, AnalyticBandState(params.a, params.lam, "theta"))
    ast = asv.prepare_initial(_perturb(u0, params.ill_prepared), u1,
                              AnalyticBandState(params.a, params.lam, "tau"))
    eta = AnalyticBandState(params.a, params.mu, "eta")

    dt_cap = min(hs.dt_max(hst), asv.dt_max(ast))
    if params.dt is not None:
        dt_cap = min(dt_cap, params.dt)
    n_steps = max(1, math.ceil(params.t_end / dt_cap - 1e-9))
    dt = params.t_end / n_steps

    rec = RemainderRecord(eps=eps, dt=dt, eta_limit=params.a / (2 * params.mu))
    terms = remainder_terms(eps)
    accs = {t.name: new_accumulator(g, 0.5, t.p) for t in terms}

    def fold(a_state, h_state, step_dt):
        wgt = np.exp(2.0 * max(eta.width, 0.0) * g.abs_xi)
        inst = fold_terms(terms, accs, _remainder_fields(ops, a_state, h_state), g, wgt, h_state.t, step_dt, 0.5)
        if keep_instant:
            rec.times.append(h_state.t)
            rec.instant.append(inst)

    fold(ast, hst, 0.0)
    rec.initial_functional = sum(t.factor * cl_total(accs[t.name], g) for t in terms if t.name in TERMINAL_TERMS)
    try:
        for _ in range(n_steps):
            drv_prev = eta_clock_driver(ast, hst)
            ast = asv.step(ast, dt)
            hst = hs.step(hst, dt)
            drv = eta_clock_driver(ast, hst)
            step_clock(eta, 0.5 * (drv_prev + drv), dt)
            fold(ast, hst, dt)
            rec.steps += 1
    except BandExhaustedError as err:
        rec.failed = f"band exhausted: {err}"
    except (BlowUpError, StepSizeError) as err:
        rec.failed = f"{type(err).__name__}: {err}"
    rec.totals = {t.name: t.factor * cl_total(accs[t.name], g) for t in terms}
    rec.terminal = float(sum(rec.totals[k] for k in TERMINAL_TERMS))
    rec.eta_history = list(eta.history)
    rec.eta_final = eta.clock
    if eta.exhausted_at is not None and rec.failed is None:
        rec.failed = f"eta band exhausted at t={eta.exhausted_at:.6g}"
    return rec


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass
class SweepResult:
    eps: list[float]
    norms: list[float]
    failed: list[str | None]
    slope: float | None
    intercept: float | None
    fit_residual: float | None
    pair_slopes: list[float]
    m_hat: list[float]
    m_variation: float | None
    degenerate: bool
    records: list[RemainderRecord] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("records")
        d["eta_final"] = [r.eta_final for r in self.records]
        d["eta_limit"] = [r.eta_limit for r in self.records]
        d["steps"] = [r.steps for r in self.records]
        d["dt"] = [r.dt for r in self.records]
        return d


def fit_slope(eps: list[float], norms: list[float]):
    """Least-squares slope of ``log norm`` against ``log eps``."""
    le, ln = np.log(np.asarray(eps)), np.log(np.asarray(norms))
    A = np.vstack([le, np.ones_like(le)]).T
    coef, *_ = np.linalg.lstsq(A, ln, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - ln) ** 2)))
    return float(coef[0]), float(coef[1]), resid


def _run_one(args):
    params, eps, keep = args
    return run_pair(params, eps, keep_instant=keep)


def sweep(params: PairParams, eps_list, workers: int | None = None, keep_instant: bool = False) -> SweepResult:
    """Paired runs for each eps, in worker processes when more than one worker is set.

    Results are merged in eps order, so the outcome does not depend on the
    worker count.
    """
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise ValueError("a sweep needs at least three eps values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps values must be strictly decreasing")
    workers = worker_count() if workers is None else workers
    jobs = [(params, e, keep_instant) for e in eps_list]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]
    norms = [r.terminal for r in records]
    failed = [r.failed for r in records]
    ok = [i for i, r in enumerate(records) if r.failed is None and r.terminal > 0 and np.isfinite(r.terminal)]
    slope = intercept = resid = None
    pair = []
    degenerate = len(ok) < 2
    if not degenerate:
        slope, intercept, resid = fit_slope([eps_list[i] for i in ok], [norms[i] for i in ok])
        for i, j in zip(ok, ok[1:]):
            pair.append(float(np.log(norms[i] / norms[j]) / np.log(eps_list[i] / eps_list[j])))
    m_hat = [norms[i] / eps_list[i] for i in ok]
    m_var = (max(m_hat) / min(m_hat) - 1.0) if len(m_hat) >= 2 else None
    return SweepResult(eps_list, norms, failed, slope, intercept, resid, pair, m_hat, m_var, degenerate, records)


@dataclass(frozen=True)
class GateResult:
    eps: float
    coarse: float
    fine: float
    relative_change: float
    passed: bool
    tolerance: float = 0.10


def refinement_gate(params: PairParams, eps: float = 0.1, tolerance: float = 0.10) -> GateResult:
    """Compare the terminal functional at two resolutions (grid x1.5, dt / 2)."""
    coarse = run_pair(params, eps, keep_instant=False)
    nx = int(round(params.Nx * 1.5 / 2)) * 2
    ny = int(round((params.Ny - 1) * 1.5)) + 1
    dt0 = coarse.dt
    fine_params = replace(params, Nx=nx, Ny=ny, dt=dt0 / 2)
    fine = run_pair(fine_params, eps, keep_instant=False)
    if coarse.failed or fine.failed:
        return GateResult(eps, coarse.terminal, fine.terminal, float("inf"), False, tolerance)
    rel = abs(fine.terminal - coarse.terminal) / max(abs(fine.terminal), 1e-300)
    return GateResult(eps, coarse.terminal, fine.terminal, rel, rel < tolerance, tolerance)
