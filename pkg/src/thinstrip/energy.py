"""Weighted energy functionals monitored along a run.

Every functional is a sum of Chemin-Lerner terms ``factor * ||e^{Rt} F_w||``
where ``F`` is a group of fields (a vector field such as ``(u_t, eps v_t)``),
``F_w`` applies the analytic weight of the run's band and the norm is
``L~^inf_t(B^s)`` or ``L~^2_t(B^s)``.  The monitor never asserts the a priori
inequalities with a fixed constant; it reports ``LHS / RHS`` where ``RHS`` is
the corresponding sum of initial-data norms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from thinstrip._interior import Interior
from thinstrip.band import check_weight_range
from thinstrip.besov import (
    CheminLernerAccumulator,
    besov_total_from_energy,
    block_norms_from_energy,
    cl_total,
    cl_update_norms,
    mode_energy,
    new_accumulator,
)
from thinstrip.spectral import Field2D, GridSpec

LEDGER_KINDS = ("hydro", "aniso", "vorticity")


def poincare_constant(grid: GridSpec) -> float:
    """Smallest eigenvalue of the discrete Dirichlet ``-d_yy``."""
    D2 = np.asarray(grid.vops.D2)[1:-1, 1:-1]
    lam = np.linalg.eigvals(-D2)
    return float(np.min(lam.real))


def default_rate(grid: GridSpec) -> float:
    """``R = 0.9 min(1/8, k/8)`` with the discrete Poincare constant ``k``."""
    return 0.9 * min(1.0 / 8.0, poincare_constant(grid) / 8.0)


# ---------------------------------------------------------------------------
# smallness of the data
# ---------------------------------------------------------------------------


def _weighted_norm(arrays, grid: GridSpec, a: float, s: float, scale=None) -> float:
    e = mode_energy(arrays, grid, scale) * np.exp(2.0 * a * grid.abs_xi)
    return besov_total_from_energy(e, grid, s)


@dataclass(frozen=True)
class SmallnessReport:
    norms: dict[str, float]
    total: float
    threshold: float
    passed: bool
    margin: float  # threshold / total (inf for zero data)
    high_norms: dict[str, float]
    convergence_threshold: float | None
    convergence_passed: bool | None

    def to_dict(self) -> dict:
        return {
            "norms": dict(self.norms),
            "total": self.total,
            "threshold": self.threshold,
            "passed": self.passed,
            "margin": self.margin,
            "high_norms": dict(self.high_norms),
            "convergence_threshold": self.convergence_threshold,
            "convergence_passed": self.convergence_passed,
        }


def smallness_check(u0: Field2D, u1: Field2D, a: float, c0: float, c2: float | None = None) -> SmallnessReport:
    """Analytic smallness of hydrostatic data.

    Sum of ``||e^{a|D|}(u0+u1)||``, ``||e^{a|D|} d_y u0||`` and ``||e^{a|D|} u1||``
    in ``B^{1/2}`` against ``c0 a``.  With ``c2`` given, also the convergence
    variant whose threshold is ``c2 a / (2 + the same three norms in B^{3/2})``.
    """
    grid = u0.grid
    check_weight_range(grid, a)
    ops = Interior(grid)
    c0_, c1_ = u0.coeffs, u1.coeffs
    groups = {
        "sum": [c0_ + c1_],
        "dy_u0": [ops.dy(c0_)],
        "u1": [c1_],
    }
    norms = {k: _weighted_norm(v, grid, a, 0.5) for k, v in groups.items()}
    high = {k: _weighted_norm(v, grid, a, 1.5) for k, v in groups.items()}
    total = float(sum(norms.values()))
    threshold = c0 * a
    margin = threshold / total if total > 0 else float("inf")
    conv_thr = conv_ok = None
    if c2 is not None:
        conv_thr = c2 * a / (2.0 + sum(high.values()))
        conv_ok = total <= conv_thr
    return SmallnessReport(norms, total, threshold, total <= threshold, margin, high, conv_thr, conv_ok)


# ---------------------------------------------------------------------------
# ledgers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TermSpec:
    name: str
    factor: float
    p: float
    members: tuple[tuple[str, float], ...]  # (field key, scale)


def _hydro_terms() -> list[TermSpec]:
    inf = np.inf
    return [
        TermSpec("u_plus_ut_inf", 0.5, inf, (("u+ut", 1.0),)),
        TermSpec("dy_u_inf", 1.0, inf, (("uy", 1.0),)),
        TermSpec("ut_l2", 0.5, 2, (("ut", 1.0),)),
        TermSpec("dy_u_l2", 0.5, 2, (("uy", 1.0),)),
        TermSpec("ut_inf", 0.5, inf, (("ut", 1.0),)),
    ]


def _aniso_terms(eps: float) -> list[TermSpec]:
    inf = np.inf
    return [
        TermSpec("sum_inf", 0.5, inf, (("u+ut", 1.0), ("v+vt", eps))),
        TermSpec("dy_inf", 1.0, inf, (("uy", 1.0), ("vy", eps))),
        TermSpec("dx_inf", eps, inf, (("ux", 1.0), ("vx", eps))),
        TermSpec("t_inf", 0.5, inf, (("ut", 1.0), ("vt", eps))),
        TermSpec("t_l2", 1.0, 2, (("ut", 1.0), ("vt", eps))),
        TermSpec("dy_l2", 1.0, 2, (("uy", 1.0), ("vy", eps))),
        TermSpec("dx_l2", eps, 2, (("ux", 1.0), ("vx", eps))),
    ]


def _vorticity_terms() -> list[TermSpec]:
    inf = np.inf
    return [
        TermSpec("dy_sum_inf", 0.5, inf, (("uy+uty", 1.0),)),
        TermSpec("dy_ut_inf", 0.5, inf, (("uty", 1.0),)),
        TermSpec("dyy_u_inf", 1.0, inf, (("uyy", 1.0),)),
        TermSpec("dy_ut_l2", 0.5, 2, (("uty", 1.0),)),
        TermSpec("dyy_u_l2", 0.5, 2, (("uyy", 1.0),)),
    ]


def fold_terms(terms, accs, flds: dict, grid: GridSpec, wgt: np.ndarray, t: float, dt: float,
               s: float) -> dict[str, float]:
    """Update each term's accumulator; return the instantaneous ``B^s`` values."""
    instant = {}
    for term in terms:
        e = mode_energy([flds[k] for k, _ in term.members], grid, [sc for _, sc in term.members]) * wgt
        blocks, low = block_norms_from_energy(e, grid)
        cl_update_norms(accs[term.name], blocks, low, t, dt)
        instant[term.name] = besov_total_from_energy(e, grid, s)
    return instant


def _derived_fields(ops: Interior, u, ut, v=None, vt=None) -> dict[str, np.ndarray]:
    out = {"u+ut": u + ut, "ut": ut, "uy": ops.dy(u), "ux": ops.dx(u)}
    out["uty"] = ops.dy(ut)
    out["uy+uty"] = out["uy"] + out["uty"]
    out["uyy"] = ops.dyy(u)
    if v is not None:
        out.update({"v+vt": v + vt, "vt": vt, "vy": ops.dy(v), "vx": ops.dx(v)})
    return out


@dataclass
class EnergyLedger:
    """Running Chemin-Lerner totals of one functional plus per-step rows."""

    kind: str
    grid: GridSpec
    R: float
    s: float
    eps: float
    terms: list[TermSpec]
    accs: dict[str, CheminLernerAccumulator]
    initial_norms: dict[str, float]
    rows: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    max_instant: dict[str, float] = field(default_factory=dict)

    @property
    def rhs(self) -> float:
        return float(sum(self.initial_norms.values()))

    def term_totals(self) -> dict[str, float]:
        return {t.name: t.factor * cl_total(self.accs[t.name], self.grid) for t in self.terms}

    @property
    def lhs(self) -> float:
        return float(sum(self.term_totals().values()))

    @property
    def ratio(self) -> float:
        rhs = self.rhs
        return self.lhs / rhs if rhs > 0 else 0.0

    def log_event(self, kind: str, t: float, detail: str = ""):
        self.events.append({"event": kind, "t": t, "detail": detail})

    def report(self) -> dict:
        return {
            "kind": self.kind,
            "R": self.R,
            "s": self.s,
            "eps": self.eps,
            "terms": self.term_totals(),
            "initial_norms": dict(self.initial_norms),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "max_instant": dict(self.max_instant),
            "events": list(self.events),
        }


def _initial_norms(kind: str, ops: Interior, a: float, s: float, eps: float, u0, u1, v0=None, v1=None):
    g = ops.grid
    if kind == "hydro":
        return {
            "dy_u0": _weighted_norm([ops.dy(u0)], g, a, s),
            "u0_plus_u1": _weighted_norm([u0 + u1], g, a, s),
            "u1": _weighted_norm([u1], g, a, s),
        }
    if kind == "aniso":
        return {
            "dy_data": _weighted_norm([ops.dy(u0), ops.dy(v0)], g, a, s, [1.0, eps]),
            "dx_data": eps * _weighted_norm([ops.dx(u0), ops.dx(v0)], g, a, s, [1.0, eps]),
            "t_data": _weighted_norm([u1, v1], g, a, s, [1.0, eps]),
            "sum_data": _weighted_norm([u0 + u1, v0 + v1], g, a, s, [1.0, eps]),
        }
    uy0, uy1 = ops.dy(u0), ops.dy(u1)
    return {
        "dyy_u0": _weighted_norm([ops.dyy(u0)], g, a, s),
        "dy_sum": _weighted_norm([uy0 + uy1], g, a, s),
        "dy_u1": _weighted_norm([uy1], g, a, s),
        "u0_s2": _weighted_norm([u0], g, a, s + 2),
        "u0_s1": _weighted_norm([u0], g, a, s + 1),
        "u1_s1": _weighted_norm([u1], g, a, s + 1),
    }


def new_ledger(kind: str, state, R: float | None = None, s: float = 0.5) -> EnergyLedger:
    """Ledger for ``kind`` in ``hydro``, ``aniso`` or ``vorticity`` started from ``state``.

    ``R`` defaults to ``0.9 min(1/8, k/8)``; the weighted initial-data norms use
    the band's initial width ``a``.
    """
    if kind not in LEDGER_KINDS:
        raise ValueError(f"ledger kind must be one of {LEDGER_KINDS}")
    grid = state.u.grid
    ops = Interior(grid)
    R = default_rate(grid) if R is None else float(R)
    eps = float(getattr(state, "eps", 1.0)) if kind == "aniso" else 1.0
    if kind == "hydro":
        terms = _hydro_terms()
    elif kind == "aniso":
        terms = _aniso_terms(eps)
    else:
        terms = _vorticity_terms()
    accs = {t.name: new_accumulator(grid, s, t.p) for t in terms}
    extra = (state.v.coeffs, state.vt.coeffs) if kind == "aniso" else ()
    init = _initial_norms(kind, ops, state.band.a, s, eps, state.u.coeffs, state.ut.coeffs, *extra)
    led = EnergyLedger(kind, grid, R, s, eps, terms, accs, init)
    track(led, state, 0.0)
    return led


def track(ledger: EnergyLedger, state, dt: float) -> EnergyLedger:
    """Fold the snapshot ``state`` (reached after a step of size ``dt``) into the ledger.

    ``L~^2`` terms use the right-endpoint rule; the first call uses ``dt = 0``.
    """
    grid = ledger.grid
    ops = Interior(grid)
    width = state.band.width
    if width < 0:
        width = 0.0
    wgt = np.exp(2.0 * (width * grid.abs_xi + ledger.R * state.t))
    v = (state.v.coeffs, state.vt.coeffs) if ledger.kind == "aniso" else ()
    flds = _derived_fields(ops, state.u.coeffs, state.ut.coeffs, *v)
    instant = fold_terms(ledger.terms, ledger.accs, flds, grid, wgt, state.t, dt, ledger.s)
    for name, inst in instant.items():
        ledger.max_instant[name] = max(ledger.max_instant.get(name, 0.0), inst)
    row = {"t": state.t, "clock": state.band.clock, "band_width": state.band.width}
    row.update(ledger.term_totals())
    row["ratio"] = ledger.ratio
    ledger.rows.append(row)
    return ledger


def track_hydro(ledger: EnergyLedger, state, dt: float) -> EnergyLedger:
    if ledger.kind != "hydro":
        raise ValueError("ledger is not a hydrostatic ledger")
    return track(ledger, state, dt)


def track_aniso(ledger: EnergyLedger, state, dt: float) -> EnergyLedger:
    if ledger.kind != "aniso":
        raise ValueError("ledger is not an anisotropic ledger")
    return track(ledger, state, dt)


def track_vorticity(ledger: EnergyLedger, state, dt: float) -> EnergyLedger:
    if ledger.kind != "vorticity":
        raise ValueError("ledger is not a vorticity ledger")
    return track(ledger, state, dt)
