"""Acceptance criteria AC-1 .. AC-10 and the named check suites.

Every criterion returns a :class:`Criterion` with the measured numbers; the
thresholds below are the pinned acceptance tolerances and are not adjusted to
make a run pass.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from thinstrip.aniso import AnisoSolver
from thinstrip.band import AnalyticBandState, plus_abs, weight_multiplier
from thinstrip.besov import agmon_ratio, bony_decompose
from thinstrip.catalog import initial_data
from thinstrip.config import RunConfig
from thinstrip.convergence import PairParams, refinement_gate, sweep
from thinstrip.energy import poincare_constant
from thinstrip.harness import EXIT_OK, simulate
from thinstrip.hydro import HydroSolver
from thinstrip.spectral import (
    DEFAULT_CUTOFFS, Field2D, GridSpec, d_dx, dyadic_table, from_function, ladder, multiply, multiply_coeffs,
    random_field, transform,
)

# pinned tolerances
PARTITION_TOL = 1e-12
RECON_TOL = 1e-12
BONY_TOL = 1e-10
PLANCHEREL_TOL = 1e-12
DOMINATION_SLACK = -1e-10
POINCARE_TOL = 1e-8
AGMON_BOUND = math.sqrt(2.0) * (1 + 1e-6)
SMALLNESS_MARGIN = 2.0
MEAN_DRIFT_TOL = 1e-8
MODAL_RATIO = (3.6, 4.4)
DIVERGENCE_DRIFT_TOL = 1e-7
PRESSURE_TOL = 1e-8
ENERGY_STEP_TOL = 1e-10
SLOPE_WINDOW = (0.8, 1.2)
M_HAT_VARIATION = 0.5
RATIO_REGRESSION = 1.05
RUNTIME = {"AC-1": 5.0, "AC-2": 10.0, "AC-3": 30.0, "AC-4": 10.0, "AC-6": 300.0, "AC-7": 600.0, "AC-8": 1800.0}

SMALL_DATUM = {"amplitude": 0.0027}
SWEEP_EPS = [0.1, 0.05, 0.025, 0.0125]


@dataclass
class Criterion:
    id: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{self.id} {'PASS' if self.passed else 'FAIL'} ({self.seconds:.1f}s) {self.detail}"


def _timed(cid: str, fn, *args, **kw) -> Criterion:
    t0 = time.perf_counter()
    passed, detail, metrics = fn(*args, **kw)
    sec = time.perf_counter() - t0
    limit = RUNTIME.get(cid)
    if limit is not None and sec >= limit:
        passed = False
        detail += f"; runtime {sec:.1f}s over the {limit:g}s budget"
    return Criterion(cid, bool(passed), detail, metrics, sec)


# ---------------------------------------------------------------------------
# Littlewood-Paley and vertical checks
# ---------------------------------------------------------------------------

LP_GRIDS = (GridSpec(Nx=64, Ny=9), GridSpec(Lx=1.0, Nx=32, Ny=9), GridSpec(Lx=20.0, Nx=128, Ny=9))


def partition_errors(grid: GridSpec) -> tuple[float, float, float]:
    """Worst errors of the inhomogeneous sum, the homogeneous sum and the grid table."""
    psi, phi = DEFAULT_CUTOFFS.psi, DEFAULT_CUTOFFS.phi
    z = np.unique(grid.abs_xi)
    inhom = psi(z) + sum(phi(z / 2.0**q) for q in range(0, 40))
    zp = z[z > 0]
    hom = sum(phi(zp / 2.0**q) for q in range(-40, 40))
    tab = dyadic_table(grid)
    table = tab.psi_low + tab.phi.sum(axis=0)
    return float(np.abs(inhom - 1).max()), float(np.abs(hom - 1).max()), float(np.abs(table - 1).max())


def ac1(seed: int = 1):
    rng = np.random.default_rng(seed)
    part = 0.0
    overlap = 0
    recon = 0.0
    for g in LP_GRIDS:
        part = max(part, *partition_errors(g))
        tab = dyadic_table(g)
        for i, q in enumerate(tab.qs):
            for j, q2 in enumerate(tab.qs):
                if abs(q - q2) >= 2:
                    overlap += int(np.count_nonzero(tab.phi[i] * tab.phi[j]))
        for _ in range(10):
            f = random_field(g, rng)
            lad = ladder(f)
            for q, b in lad.blocks.items():
                for q2 in lad.blocks:
                    if abs(q - q2) >= 2:
                        overlap += int(np.count_nonzero(b.coeffs * tab.row(q2)[:, None]))
            recon = max(recon, (lad.reconstruct() - f).l2_norm() / f.l2_norm())
    ok = part <= PARTITION_TOL and overlap == 0 and recon <= RECON_TOL
    return ok, f"partition err {part:.2e}, overlaps {overlap}, reconstruction {recon:.2e}", \
        {"partition": part, "overlaps": overlap, "reconstruction": recon}


def bernstein_ratios(f: Field2D) -> list[tuple[int, float]]:
    """``(q, ||d_x Delta_q f|| / (2^q ||Delta_q f||))`` for every nonzero block."""
    lad = ladder(f)
    out = []
    for q, b in lad.blocks.items():
        n = b.l2_norm()
        if n > 0:
            out.append((q, d_dx(b).l2_norm() / n / 2.0**q))
    return out


def ac2(seed: int = 2, count: int = 100):
    rng = np.random.default_rng(seed)
    lo, hi = np.inf, -np.inf
    for i in range(count):
        g = LP_GRIDS[i % len(LP_GRIDS)]
        r = [v for _, v in bernstein_ratios(random_field(g, rng))]
        lo, hi = min(lo, min(r)), max(hi, max(r))
    ok = lo >= 0.75 and hi <= 8.0 / 3.0
    return ok, f"normalised ratios in [{lo:.4f}, {hi:.4f}] vs [0.75, 2.6667]", {"min": lo, "max": hi}


def bony_error(f: Field2D, g: Field2D) -> float:
    Tfg, Tgf, R = bony_decompose(f, g)
    prod = multiply(f, g)
    return (Tfg + Tgf + R - prod).l2_norm() / max(prod.l2_norm(), 1e-300)


def ac3(seed: int = 3, count: int = 50):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        g = LP_GRIDS[i % len(LP_GRIDS)]
        worst = max(worst, bony_error(random_field(g, rng), random_field(g, rng)))
    return worst <= BONY_TOL, f"worst relative error {worst:.2e} over {count} pairs", {"worst": worst}


def domination_slack(f: Field2D, g: Field2D, width: float) -> float:
    """Smallest ``w (f+_w g+_w)^ - |w (fg)^|`` over modes and rows."""
    w = weight_multiplier(f.grid, width)[:, None]
    lhs = np.abs(w * multiply(f, g).coeffs)
    rhs = multiply_coeffs(w * plus_abs(f).coeffs, w * plus_abs(g).coeffs, f.grid.Nx).real
    return float((rhs - lhs).min())


def ac4(seed: int = 4, count: int = 50):
    rng = np.random.default_rng(seed)
    planch = 0.0
    slack = np.inf
    for i in range(count):
        g = LP_GRIDS[i % len(LP_GRIDS)]
        f, h = random_field(g, rng), random_field(g, rng)
        planch = max(planch, abs(plus_abs(f).l2_norm() / f.l2_norm() - 1))
        width = 3.0 / float(g.abs_xi.max())  # weight exponent at most 3
        slack = min(slack, domination_slack(f, h, width))
    ok = planch <= PLANCHEREL_TOL and slack >= DOMINATION_SLACK
    return ok, f"Plancherel err {planch:.2e}, min domination slack {slack:.2e}", {"plancherel": planch, "slack": slack}


def random_dirichlet_profile(grid: GridSpec, rng: np.random.Generator, modes: int = 8) -> np.ndarray:
    n = np.arange(1, modes + 1)
    c = rng.standard_normal(modes) / n
    return np.sin(np.pi * np.outer(grid.y, n)) @ c


def ac5(seed: int = 5, count: int = 100):
    g = GridSpec(Nx=8, Ny=64)
    k = poincare_constant(g)
    rng = np.random.default_rng(seed)
    agm = max(agmon_ratio(random_dirichlet_profile(g, rng), g) for _ in range(count))
    ok = abs(k - np.pi**2) <= POINCARE_TOL and agm <= AGMON_BOUND
    return ok, f"eigenvalue - pi^2 = {k - np.pi**2:.2e}, max Agmon ratio {agm:.4f}", \
        {"poincare_error": k - np.pi**2, "agmon_max": agm}


# ---------------------------------------------------------------------------
# solver runs
# ---------------------------------------------------------------------------


def ac6_config(output_dir) -> RunConfig:
    return RunConfig(grid=GridSpec(Nx=64, Ny=64), system="hydrostatic", t_end=10.0, dt=0.01,
                     data="gauss-sine", data_params=dict(SMALL_DATUM), monitors=["hydro", "vorticity"],
                     vorticity_s=[0.5, 1.5], output_dir=str(output_dir))


def ac7_config(output_dir) -> RunConfig:
    return RunConfig(grid=GridSpec(Nx=64, Ny=33), system="anisotropic", eps=0.1, t_end=5.0,
                     data="gauss-sine", data_params=dict(SMALL_DATUM), monitors=["aniso"],
                     output_dir=str(output_dir))


def modal_errors(dts=(0.02, 0.01, 0.005), n: int = 2, t_end: float = 1.0) -> list[float]:
    """Linear hydrostatic run against ``Re exp(sigma t) sin(n pi y)``.

    ``sigma`` is a root of ``sigma^2 + sigma + (n pi)^2 = 0``.
    """
    g = GridSpec(Nx=16, Ny=64)
    sig = (-1 + np.sqrt(complex(1 - 4 * (n * np.pi) ** 2))) / 2
    u0 = from_function(g, lambda X, Y: np.sin(n * np.pi * Y) + 0 * X)
    exact = np.real(np.exp(sig * t_end)) * np.sin(n * np.pi * g.mesh()[1])
    errs = []
    for dt in dts:
        s = HydroSolver(g, nonlinear=False)
        st = s.initial_state(u0, u0 * float(sig.real), AnalyticBandState(a=0.5, rate=1e-6))
        for _ in range(int(round(t_end / dt))):
            st = s.step(st, dt)
        errs.append(float(np.abs(st.u.values() - exact).max()))
    return errs


def ac6(run, limit: float = 0.25):
    """``limit`` is ``a / (2 lam)`` for the AC-6 config."""
    s = run.summary
    small = s["smallness"]
    errs = modal_errors()
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    checks = {
        "exit": run.exit_code == EXIT_OK,
        "margin": small["passed"] and small["margin"] >= SMALLNESS_MARGIN,
        "half_band": s["half_band_ok"] and s["clock_final"] < limit,
        "mean_drift": s["max_mean_drift"] < MEAN_DRIFT_TOL,
        "modal": all(MODAL_RATIO[0] <= r <= MODAL_RATIO[1] for r in ratios),
    }
    detail = (f"exit {run.exit_code}, margin {small['margin']:.4f}, theta {s['clock_final']:.4e} "
              f"(limit {limit:g}), "
              f"drift {s['max_mean_drift']:.1e}, modal ratios {ratios[0]:.3f}/{ratios[1]:.3f}")
    failed = [k for k, v in checks.items() if not v]
    if failed:
        detail += f"; failed: {', '.join(failed)}"
    return not failed, detail, {"checks": checks, "modal_errors": errs, "modal_ratios": ratios}


def manufactured_pressure_error(eps: float = 0.1) -> float:
    g = GridSpec(Nx=32, Ny=33)
    s = AnisoSolver(g, eps)
    X, Y = g.mesh()
    k = 2 * np.pi / g.Lx
    exact = np.cos(k * X) * np.cos(np.pi * Y)
    rhs = transform(g, (-k**2 - np.pi**2 / eps**2) * exact).coeffs
    zero = np.zeros(g.Nx)
    p, _ = s.solve_pressure_modes(rhs, zero, zero)
    return float(np.abs(Field2D(g, p).values() - exact).max())


def linear_energy_increase(eps: float = 0.1, t_end: float = 5.0) -> float:
    """Largest single-step increase of E_eps relative to E_eps(0), linear dynamics."""
    g = GridSpec(Nx=64, Ny=33)
    s = AnisoSolver(g, eps, nonlinear=False)
    u0, u1 = initial_data(g, "gauss-sine", {"amplitude": 1.0, "u1_factor": 0.5})
    st = s.prepare_initial(u0, u1, AnalyticBandState(a=0.5, rate=1e-6))
    e0 = e = s.energy(st)
    dt = s.dt_max(st)
    worst = -np.inf
    for _ in range(int(math.ceil(t_end / dt))):
        st = s.step(st, dt)
        e_new = s.energy(st)
        worst = max(worst, (e_new - e) / e0)
        e = e_new
    return float(worst)


def ac7(run):
    s = run.summary
    perr = manufactured_pressure_error()
    rise = linear_energy_increase()
    checks = {
        "exit": run.exit_code == EXIT_OK,
        "t_end": abs(s["t_final"] - 5.0) < 1e-9,
        "divergence": s["divergence_drift"] < DIVERGENCE_DRIFT_TOL,
        "pressure": perr <= PRESSURE_TOL,
        "energy": rise <= ENERGY_STEP_TOL,
    }
    detail = (f"exit {run.exit_code}, divergence drift {s['divergence_drift']:.2e}, "
              f"pressure err {perr:.2e}, max step energy rise {rise:.2e}")
    failed = [k for k, v in checks.items() if not v]
    if failed:
        detail += f"; failed: {', '.join(failed)}"
    return not failed, detail, {"checks": checks, "pressure_error": perr, "energy_rise": rise}


def ac8_params() -> PairParams:
    return PairParams(Nx=64, Ny=33, data="gauss-sine", data_params=tuple(sorted(SMALL_DATUM.items())), t_end=1.0)


def ac8(workers: int | None = None):
    params = ac8_params()
    gate = refinement_gate(params, eps=SWEEP_EPS[0])
    if not gate.passed:
        return False, f"refinement gate failed (change {gate.relative_change:.2e})", {"gate": gate.relative_change}
    res = sweep(params, SWEEP_EPS, workers=workers)
    eta_ok = all(r.eta_final < r.eta_limit for r in res.records)
    checks = {
        "no_failures": not any(res.failed),
        "slope": res.slope is not None and SLOPE_WINDOW[0] <= res.slope <= SLOPE_WINDOW[1],
        "m_hat": res.m_variation is not None and res.m_variation < M_HAT_VARIATION,
        "eta": eta_ok,
    }
    slope = float("nan") if res.slope is None else res.slope
    mvar = float("nan") if res.m_variation is None else res.m_variation
    detail = (f"gate change {gate.relative_change:.2e}, slope {slope:.4f} "
              f"(pairs {', '.join(f'{p:.3f}' for p in res.pair_slopes)}), M-hat variation {mvar:.3f}")
    failed = [k for k, v in checks.items() if not v]
    if failed:
        detail += f"; failed: {', '.join(failed)}"
    return not failed, detail, {"checks": checks, "gate": gate.relative_change, "slope": res.slope,
                                "pair_slopes": res.pair_slopes, "norms": res.norms, "m_variation": res.m_variation}


def ledger_ratios(*runs) -> dict[str, dict]:
    """Ratio and term totals of every ledger in the given run summaries."""
    out = {}
    for tag, run in runs:
        for name, rep in run.summary["ledgers"].items():
            out[f"{tag}.{name}"] = {"ratio": rep["ratio"], "terms": rep["terms"]}
    return out


def calibration_doc(ratios: dict) -> dict:
    return {name: {"ratio": r["ratio"], "C_cal": r["ratio"] * RATIO_REGRESSION} for name, r in sorted(ratios.items())}


def ac9(ratios: dict, golden: dict | None):
    if golden is None:
        return False, "no calibration file (run check --calibrate first)", {"ratios": ratios}
    problems = []
    worst = 0.0
    for name, r in ratios.items():
        terms = list(r["terms"].values())
        if not all(math.isfinite(v) for v in terms + [r["ratio"]]):
            problems.append(f"{name} non-finite")
            continue
        ref = golden.get(name)
        if ref is None:
            problems.append(f"{name} missing from calibration")
            continue
        worst = max(worst, r["ratio"] / ref["C_cal"])
        if r["ratio"] > ref["C_cal"]:
            problems.append(f"{name} ratio {r['ratio']:.4f} > C_cal {ref['C_cal']:.4f}")
    missing = sorted(set(golden) - set(ratios))
    problems += [f"{m} not produced" for m in missing]
    detail = f"{len(ratios)} ledgers, worst ratio/C_cal {worst:.4f}"
    if problems:
        detail += "; " + "; ".join(problems)
    return not problems, detail, {"ratios": {k: v["ratio"] for k, v in ratios.items()}}


def compare_runs(a, b) -> list[str]:
    """Files listed in either manifest whose bytes differ (or are missing)."""
    a, b = Path(a), Path(b)
    fa = json.loads((a / "manifest.json").read_text())["files"]
    fb = json.loads((b / "manifest.json").read_text())["files"]
    diffs = []
    for rel in sorted(set(fa) | set(fb)):
        pa, pb = a / rel, b / rel
        if not (pa.exists() and pb.exists()) or pa.read_bytes() != pb.read_bytes():
            diffs.append(rel)
    return diffs


def ac10(first_dir, second_dir):
    run = simulate(ac6_config(second_dir), second_dir)
    diffs = compare_runs(first_dir, second_dir)
    files = json.loads((Path(first_dir) / "manifest.json").read_text())["files"]
    data_files = [f for f in files if f.endswith((".csv", ".json"))]
    ok = not diffs and run.exit_code == EXIT_OK
    detail = f"{len(files)} files compared ({len(data_files)} CSV/JSON), {len(diffs)} differ"
    if diffs:
        detail += ": " + ", ".join(diffs[:5])
    return ok, detail, {"differences": diffs}


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

SUITES = {
    "lp": ("AC-1", "AC-2", "AC-3", "AC-4"),
    "vertical": ("AC-5",),
    "hydro": ("AC-6",),
    "aniso": ("AC-7",),
    "convergence": ("AC-8",),
    "ratios": ("AC-9",),
    "determinism": ("AC-10",),
    "acceptance": tuple(f"AC-{i}" for i in range(1, 11)),
}


def load_golden(path) -> dict | None:
    p = Path(path) if path else None
    if p is None or not p.exists():
        return None
    return json.loads(p.read_text())


def run_criteria(ids, workdir, golden_path=None, workers=None, calibrate: bool = False, emit=None):
    """Evaluate the selected criteria in order; ``emit`` receives each result as it lands."""
    workdir = Path(workdir)
    results = []
    runs = {}

    def report(c: Criterion):
        results.append(c)
        if emit:
            emit(c)

    def run_ac6():
        if "ac6" not in runs:
            runs["ac6"] = simulate(ac6_config(workdir / "ac6"), workdir / "ac6")
        return runs["ac6"]

    def run_ac7():
        if "ac7" not in runs:
            runs["ac7"] = simulate(ac7_config(workdir / "ac7"), workdir / "ac7", figures=False)
        return runs["ac7"]

    simple = {"AC-1": ac1, "AC-2": ac2, "AC-3": ac3, "AC-4": ac4, "AC-5": ac5}
    for cid in ids:
        if cid in simple:
            report(_timed(cid, simple[cid]))
        elif cid == "AC-6":
            report(_timed(cid, lambda: ac6(run_ac6())))
        elif cid == "AC-7":
            report(_timed(cid, lambda: ac7(run_ac7())))
        elif cid == "AC-8":
            report(_timed(cid, ac8, workers))
        elif cid == "AC-9":
            ratios = ledger_ratios(("hydrostatic", run_ac6()), ("anisotropic", run_ac7()))
            if calibrate and golden_path:
                Path(golden_path).parent.mkdir(parents=True, exist_ok=True)
                Path(golden_path).write_text(json.dumps(calibration_doc(ratios), indent=1, sort_keys=True) + "\n")
            report(_timed(cid, ac9, ratios, load_golden(golden_path)))
        elif cid == "AC-10":
            run_ac6()
            report(_timed(cid, ac10, workdir / "ac6", workdir / "ac6_repeat"))
        else:
            raise KeyError(f"unknown criterion {cid!r}")
    return results
