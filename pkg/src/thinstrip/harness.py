"""Experiment orchestration: simulate, sweep and export with deterministic outputs."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from thinstrip._interior import BlowUpError
from thinstrip.aniso import AnisoSolver, divergence
from thinstrip.band import AnalyticBandState, BandExhaustedError
from thinstrip.catalog import initial_data
from thinstrip.config import RunConfig
from thinstrip.convergence import PairParams, refinement_gate, run_pair, sweep
from thinstrip.energy import default_rate, new_ledger, smallness_check, track
from thinstrip.hydro import HydroSolver
from thinstrip.output import RunWriter, dumps_csv, dumps_json, read_csv
from thinstrip.spectral import d_dy, inverse_transform, mean_y_coeffs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_BAND = 4
EXIT_ACCEPTANCE = 5


@dataclass
class RunReport:
    exit_code: int
    out_dir: Path
    summary: dict
    files: dict = field(default_factory=dict)


def _fixed_step(t_end: float, dt_cap: float) -> tuple[float, int]:
    n = max(1, math.ceil(t_end / dt_cap - 1e-9))
    return t_end / n, n


def _snapshot(state, step: int, eps: float | None = None) -> dict:
    g = state.u.grid
    doc = {"grid": g.to_dict(), "t": state.t, "step": step, "eps": eps,
           "u": inverse_transform(state.u).tolist(), "ut": inverse_transform(state.ut).tolist()}
    if hasattr(state, "v"):
        doc["v"] = inverse_transform(state.v).tolist()
        doc["vt"] = inverse_transform(state.vt).tolist()
    return doc


def _pair_params(cfg: RunConfig) -> PairParams:
    g = cfg.grid
    return PairParams(Lx=g.Lx, Nx=g.Nx, Ny=g.Ny, vertical_scheme=g.vertical_scheme, data=cfg.data,
                      data_params=tuple(sorted(cfg.data_params.items())), a=cfg.a, lam=cfg.lam, mu=cfg.mu,
                      t_end=cfg.t_end, dt=cfg.dt, nonlinear=cfg.nonlinear)


def _evolve(cfg: RunConfig, writer: RunWriter):
    """Single-system run; returns (summary, rows, ledgers, exit code)."""
    g = cfg.grid
    u0, u1 = initial_data(g, cfg.data, cfg.data_params)
    small = smallness_check(u0, u1, cfg.a, cfg.c0, cfg.c2)
    R = default_rate(g) if cfg.R is None else cfg.R
    hydro = cfg.system == "hydrostatic"
    if hydro:
        solver = HydroSolver(g, nonlinear=cfg.nonlinear)
        state = solver.initial_state(u0, u1, AnalyticBandState(cfg.a, cfg.lam, "theta"))
        eps = None
    else:
        eps = cfg.eps
        solver = AnisoSolver(g, eps, nonlinear=cfg.nonlinear)
        state = solver.prepare_initial(u0, u1, AnalyticBandState(cfg.a, cfg.lam, "tau"))
    ledgers = {}
    for kind in cfg.monitors:
        if kind == "vorticity":
            for s in cfg.vorticity_s:
                ledgers[f"vorticity_s{s:g}"] = new_ledger("vorticity", state, R, s)
        else:
            ledgers[kind] = new_ledger(kind, state, R, 0.5)

    dt_cap = solver.dt_max(state) if cfg.dt is None else min(cfg.dt, solver.dt_max(state))
    dt, n_steps = _fixed_step(cfg.t_end, dt_cap)

    def diagnostics(st) -> dict:
        row = {"t": st.t, "clock": st.band.clock, "band_width": st.band.width}
        row["mean_drift"] = float(np.abs(mean_y_coeffs(st.u)).max())
        if hydro:
            row["energy"] = 0.5 * st.ut.l2_norm() ** 2 + 0.5 * d_dy(st.u).l2_norm() ** 2
        else:
            row["divergence"] = divergence(st.u, st.v).l2_norm()
            row["divergence_t"] = divergence(st.ut, st.vt).l2_norm()
            row["energy"] = solver.energy(st)
        for name, led in ledgers.items():
            for k, v in led.term_totals().items():
                row[f"{name}.{k}"] = v
            row[f"{name}.ratio"] = led.ratio
        return row

    initial = diagnostics(state)
    rows = []
    code = EXIT_OK
    event = None
    if cfg.snapshot_every:
        writer.json("snapshots/step_000000.json", _snapshot(state, 0, eps))
    for k in range(1, n_steps + 1):
        try:
            state = solver.step(state, dt)
        except BlowUpError as err:
            code, event = EXIT_BLOWUP, {"event": "blow-up", "t": err.time, "detail": str(err)}
            break
        except BandExhaustedError as err:
            state = err.state
            code, event = EXIT_BAND, {"event": "band-exhausted", "t": err.crossing_time, "detail": str(err)}
        for led in ledgers.values():
            track(led, state, dt)
        row = {"step": k}
        row.update(diagnostics(state))
        rows.append(row)
        if cfg.snapshot_every and k % cfg.snapshot_every == 0:
            writer.json(f"snapshots/step_{k:06d}.json", _snapshot(state, k, eps))
        if event is not None:
            break
    for led in ledgers.values():
        if event is not None:
            led.log_event(event["event"], event["t"], event["detail"])

    kind = "theta" if hydro else "tau"
    summary = {
        "system": cfg.system,
        "eps": eps,
        "dt": dt,
        "steps_planned": n_steps,
        "steps": len(rows),
        "t_final": state.t,
        "clock_kind": kind,
        "clock_final": state.band.clock,
        "band_width_final": state.band.width,
        "clock_margin": state.band.clock * cfg.lam / cfg.a,
        "half_band_ok": state.band.clock < cfg.a / (2 * cfg.lam),
        "R": R,
        "smallness": small.to_dict(),
        "initial": initial,
        "max_mean_drift": max([initial["mean_drift"]] + [r["mean_drift"] for r in rows]),
        "ledgers": {name: led.report() for name, led in ledgers.items()},
        "event": event,
    }
    if not hydro:
        divs = [initial["divergence"]] + [r["divergence"] for r in rows]
        summary["divergence_initial"] = divs[0]
        summary["divergence_max"] = max(divs)
        summary["divergence_drift"] = max(divs) - divs[0]
    return summary, rows, ledgers, code, state


def simulate(cfg: RunConfig, out_dir=None, figures: bool = True) -> RunReport:
    out = Path(out_dir or cfg.output_dir)
    writer = RunWriter(out)
    t0 = time.perf_counter()
    timings = {}
    if cfg.system == "paired":
        eps = cfg.eps if cfg.eps is not None else cfg.eps_list[0]
        rec = run_pair(_pair_params(cfg), eps)
        rows = [{"step": i, "t": t, **inst} for i, (t, inst) in enumerate(zip(rec.times, rec.instant))][1:]
        summary = {"system": "paired", "record": {k: v for k, v in rec.to_dict().items()
                                                  if k not in ("times", "instant", "eta_history")}}
        code = EXIT_BAND if rec.failed and "band" in rec.failed else (EXIT_BLOWUP if rec.failed else EXIT_OK)
        writer.csv("ledger.csv", rows)
        writer.csv("clock.csv", [{"t": t, "clock": c, "band_width": cfg.a - cfg.mu * c} for t, c in rec.eta_history])
        timings["run"] = time.perf_counter() - t0
        writer.json("report.json", {"exit_code": code, **summary})
        writer.manifest(cfg.to_dict(), timings)
        return RunReport(code, out, summary, dict(writer.files))

    summary, rows, ledgers, code, state = _evolve(cfg, writer)
    timings["run"] = time.perf_counter() - t0
    writer.csv("ledger.csv", rows)
    hist = state.band.history
    writer.csv("clock.csv", [{"t": t, "clock": c, "band_width": state.band.a - state.band.rate * c} for t, c in hist])
    writer.json("report.json", {"exit_code": code, **summary})
    if figures and rows:
        from thinstrip import plotting

        t1 = time.perf_counter()
        fig = plotting.clock_figure(rows, summary["clock_kind"], cfg.a / (2 * cfg.lam))
        writer.figure("figures/clock.png", fig)
        plotting.close(fig)
        for name, led in ledgers.items():
            fig = plotting.terms_figure(rows, [f"{name}.{k}" for k in led.term_totals()], name)
            writer.figure(f"figures/{name}.png", fig)
            plotting.close(fig)
        timings["figures"] = time.perf_counter() - t1
    writer.manifest(cfg.to_dict(), timings)
    return RunReport(code, out, summary, dict(writer.files))


def run_sweep(cfg: RunConfig, eps_list=None, out_dir=None, gate: bool = True, figures: bool = True,
              workers: int | None = None) -> RunReport:
    """Refinement gate (optional) followed by the eps sweep on shared data."""
    eps_list = list(eps_list or cfg.eps_list or [])
    out = Path(out_dir or cfg.output_dir)
    writer = RunWriter(out)
    params = _pair_params(cfg)
    timings = {}
    summary: dict = {"eps_list": eps_list}
    t0 = time.perf_counter()
    if gate:
        gr = refinement_gate(params, eps=eps_list[0])
        summary["gate"] = {"eps": gr.eps, "coarse": gr.coarse, "fine": gr.fine,
                           "relative_change": gr.relative_change, "tolerance": gr.tolerance, "passed": gr.passed}
        timings["gate"] = time.perf_counter() - t0
    t1 = time.perf_counter()
    res = sweep(params, eps_list, workers=workers, keep_instant=True)
    timings["sweep"] = time.perf_counter() - t1
    summary["sweep"] = res.summary()
    rows = [{"eps": e, "norm": n, "m_hat": (n / e), "failed": f or ""}
            for e, n, f in zip(res.eps, res.norms, res.failed)]
    writer.csv("sweep.csv", rows)
    for rec in res.records:
        led = [{"step": i, "t": t, **inst} for i, (t, inst) in enumerate(zip(rec.times, rec.instant))][1:]
        writer.csv(f"remainder_eps_{rec.eps:g}.csv", led)
    writer.json("sweep.json", summary)
    if figures and not res.degenerate:
        from thinstrip import plotting

        fig = plotting.sweep_figure(res.eps, res.norms, res.slope, res.intercept)
        writer.figure("figures/sweep.png", fig)
        plotting.close(fig)
    writer.manifest(cfg.to_dict(), timings)
    return RunReport(EXIT_OK, out, summary, dict(writer.files))


def export(run_dir, fmt: str = "json", out_dir=None) -> list[Path]:
    """Turn every CSV ledger of a run into a plot-ready bundle (column arrays or CSV)."""
    run = Path(run_dir)
    if fmt not in ("json", "csv"):
        raise ValueError(f"export format must be 'json' or 'csv', got {fmt!r}")
    if not (run / "manifest.json").exists():
        raise FileNotFoundError(f"{run} is not a run directory (no manifest.json)")
    dest = Path(out_dir) if out_dir else run / f"export_{fmt}"
    dest.mkdir(parents=True, exist_ok=True)
    written = []
    for src in sorted(run.glob("*.csv")):
        rows = read_csv(src)
        cols = list(rows[0]) if rows else []
        if fmt == "json":
            data = {c: [_parse(r[c]) for r in rows] for c in cols}
            path = dest / (src.stem + ".json")
            path.write_text(dumps_json({"source": src.name, "rows": len(rows), "columns": data}), encoding="utf-8")
        else:
            path = dest / src.name
            parsed = [{c: _parse(r[c]) for c in cols} for r in rows]
            path.write_text(dumps_csv(parsed, cols), encoding="utf-8")
        written.append(path)
    return written


def _parse(cell: str):
    if cell == "":
        return None
    try:
        if cell.lstrip("-").isdigit():
            return int(cell)
        return float(cell)
    except ValueError:
        return cell
