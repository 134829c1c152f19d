"""Run configuration: a versioned TOML schema where unknown keys are errors.

    schema_version = 1

    [grid]      Lx, Nx, Ny, vertical_scheme
    [run]       system, t_end, dt, nonlinear, snapshot_every, seed, output_dir
    [data]      name, and a [data.params] table passed to the catalog
    [band]      a, lam, mu, R
    [eps]       value, list
    [monitors]  kinds, vorticity_s
    [smallness] c0, c2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import tomli
import tomli_w

from thinstrip.catalog import CATALOG, CatalogError, resolve_params
from thinstrip.spectral import GridSpec
from thinstrip.vertical import SCHEMES

SCHEMA_VERSION = 1
SYSTEMS = ("hydrostatic", "anisotropic", "paired")
MONITORS = ("hydro", "aniso", "vorticity")
DEFAULT_MONITORS = {"hydrostatic": ["hydro"], "anisotropic": ["aniso"], "paired": []}


class ConfigError(ValueError):
    """Raised with every field-level problem found."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class RunConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    system: str = "hydrostatic"
    t_end: float = 5.0
    dt: float | None = None
    nonlinear: bool = True
    snapshot_every: int = 0
    seed: int = 0
    output_dir: str = "runs/out"
    data: str = "gauss-sine"
    data_params: dict = field(default_factory=dict)
    a: float = 0.5
    lam: float = 1.0
    mu: float = 1.0
    R: float | None = None
    eps: float | None = None
    eps_list: list[float] | None = None
    monitors: list[str] = field(default_factory=lambda: ["hydro"])
    vorticity_s: list[float] = field(default_factory=lambda: [0.5])
    c0: float = 0.1
    c2: float | None = None

    # -- serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        g = self.grid
        out = {
            "schema_version": SCHEMA_VERSION,
            "grid": {"Lx": g.Lx, "Nx": g.Nx, "Ny": g.Ny, "vertical_scheme": g.vertical_scheme},
            "run": {"system": self.system, "t_end": self.t_end, "nonlinear": self.nonlinear,
                    "snapshot_every": self.snapshot_every, "seed": self.seed, "output_dir": self.output_dir},
            "data": {"name": self.data, "params": dict(self.data_params)},
            "band": {"a": self.a, "lam": self.lam, "mu": self.mu},
            "eps": {},
            "monitors": {"kinds": list(self.monitors), "vorticity_s": list(self.vorticity_s)},
            "smallness": {"c0": self.c0},
        }
        if self.dt is not None:
            out["run"]["dt"] = self.dt
        if self.R is not None:
            out["band"]["R"] = self.R
        if self.eps is not None:
            out["eps"]["value"] = self.eps
        if self.eps_list is not None:
            out["eps"]["list"] = list(self.eps_list)
        if self.c2 is not None:
            out["smallness"]["c2"] = self.c2
        return out

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())


_SCHEMA = {
    "grid": {"Lx", "Nx", "Ny", "vertical_scheme"},
    "run": {"system", "t_end", "dt", "nonlinear", "snapshot_every", "seed", "output_dir"},
    "data": {"name", "params"},
    "band": {"a", "lam", "mu", "R"},
    "eps": {"value", "list"},
    "monitors": {"kinds", "vorticity_s"},
    "smallness": {"c0", "c2"},
}


def _num(problems, path, value, *, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{path}: expected a number, got {value!r}")
        return None
    if integer and not isinstance(value, int):
        problems.append(f"{path}: expected an integer, got {value!r}")
        return None
    if not math.isfinite(value):
        problems.append(f"{path}: must be finite")
        return None
    if positive and value <= 0:
        problems.append(f"{path}: must be positive, got {value}")
    if nonneg and value < 0:
        problems.append(f"{path}: must be nonnegative, got {value}")
    return value


def from_dict(doc: dict) -> RunConfig:
    """Build a config, collecting every problem before raising ``ConfigError``."""
    problems: list[str] = []
    doc = dict(doc)
    version = doc.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        problems.append(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    for key in sorted(set(doc) - set(_SCHEMA)):
        problems.append(f"{key}: unknown section")
    for sec, allowed in _SCHEMA.items():
        body = doc.get(sec, {})
        if not isinstance(body, dict):
            problems.append(f"{sec}: expected a table")
            continue
        for key in sorted(set(body) - allowed):
            problems.append(f"{sec}.{key}: unknown key")
    if problems:
        raise ConfigError(problems)

    cfg = RunConfig()
    gd = doc.get("grid", {})
    Lx = _num(problems, "grid.Lx", gd.get("Lx", cfg.grid.Lx), positive=True)
    Nx = _num(problems, "grid.Nx", gd.get("Nx", cfg.grid.Nx), integer=True)
    Ny = _num(problems, "grid.Ny", gd.get("Ny", cfg.grid.Ny), integer=True)
    scheme = gd.get("vertical_scheme", cfg.grid.vertical_scheme)
    if scheme not in SCHEMES:
        problems.append(f"grid.vertical_scheme: must be one of {SCHEMES}, got {scheme!r}")
    if isinstance(Nx, int) and (Nx < 8 or Nx % 2):
        problems.append(f"grid.Nx: must be even and >= 8, got {Nx}")
    if isinstance(Ny, int) and Ny < 9:
        problems.append(f"grid.Ny: must be >= 9, got {Ny}")

    rd = doc.get("run", {})
    system = rd.get("system", cfg.system)
    if system not in SYSTEMS:
        problems.append(f"run.system: must be one of {SYSTEMS}, got {system!r}")
    t_end = _num(problems, "run.t_end", rd.get("t_end", cfg.t_end), positive=True)
    dt = rd.get("dt")
    if dt is not None:
        dt = _num(problems, "run.dt", dt, positive=True)
    nonlinear = rd.get("nonlinear", cfg.nonlinear)
    if not isinstance(nonlinear, bool):
        problems.append("run.nonlinear: expected true or false")
    snap = _num(problems, "run.snapshot_every", rd.get("snapshot_every", 0), nonneg=True, integer=True)
    seed = _num(problems, "run.seed", rd.get("seed", 0), nonneg=True, integer=True)
    out_dir = rd.get("output_dir", cfg.output_dir)
    if not isinstance(out_dir, str) or not out_dir:
        problems.append("run.output_dir: expected a nonempty string")

    dd = doc.get("data", {})
    name = dd.get("name", cfg.data)
    params = dd.get("params", {})
    if name not in CATALOG:
        problems.append(f"data.name: unknown catalog entry {name!r}; known: {sorted(CATALOG)}")
    elif not isinstance(params, dict):
        problems.append("data.params: expected a table")
    else:
        try:
            resolve_params(name, params)
        except CatalogError as err:
            problems.append(f"data.params: {err.args[0]}")

    bd = doc.get("band", {})
    a = _num(problems, "band.a", bd.get("a", cfg.a), positive=True)
    lam = _num(problems, "band.lam", bd.get("lam", cfg.lam), positive=True)
    mu = _num(problems, "band.mu", bd.get("mu", cfg.mu), positive=True)
    if isinstance(lam, (int, float)) and isinstance(mu, (int, float)) and mu < lam:
        problems.append(f"band.mu: must satisfy mu >= lam ({mu} < {lam})")
    R = bd.get("R")
    if R is not None:
        R = _num(problems, "band.R", R, nonneg=True)
    if isinstance(a, (int, float)) and isinstance(Nx, int) and isinstance(Lx, (int, float)) and Lx > 0:
        expo = a * math.pi * Nx / Lx
        if expo > 300:
            problems.append(f"band.a: weight exponent a*xi_max = {expo:.1f} exceeds 300")

    ed = doc.get("eps", {})
    eps = ed.get("value")
    if eps is not None:
        eps = _num(problems, "eps.value", eps, positive=True)
        if isinstance(eps, (int, float)) and eps > 1:
            problems.append(f"eps.value: must lie in (0, 1], got {eps}")
    eps_list = ed.get("list")
    if eps_list is not None:
        if not isinstance(eps_list, list) or not eps_list:
            problems.append("eps.list: expected a nonempty array")
        else:
            for i, e in enumerate(eps_list):
                v = _num(problems, f"eps.list[{i}]", e, positive=True)
                if isinstance(v, (int, float)) and v > 1:
                    problems.append(f"eps.list[{i}]: must lie in (0, 1]")
            if any(b >= a_ for a_, b in zip(eps_list, eps_list[1:])):
                problems.append("eps.list: values must be strictly decreasing")
    if system in ("anisotropic", "paired") and eps is None and not eps_list:
        problems.append(f"eps.value: required for system {system!r}")

    md = doc.get("monitors", {})
    kinds = md.get("kinds", list(DEFAULT_MONITORS.get(system, cfg.monitors)))
    if not isinstance(kinds, list) or any(k not in MONITORS for k in kinds):
        problems.append(f"monitors.kinds: entries must be in {MONITORS}, got {kinds!r}")
    elif system == "hydrostatic" and "aniso" in kinds:
        problems.append("monitors.kinds: 'aniso' needs an anisotropic system")
    elif system == "anisotropic" and ({"hydro", "vorticity"} & set(kinds)):
        problems.append("monitors.kinds: 'hydro' and 'vorticity' need the hydrostatic system")
    vs = md.get("vorticity_s", list(cfg.vorticity_s))
    if not isinstance(vs, list):
        problems.append("monitors.vorticity_s: expected an array")
    else:
        for i, s in enumerate(vs):
            v = _num(problems, f"monitors.vorticity_s[{i}]", s)
            if isinstance(v, (int, float)) and not (-2 <= v <= 2):
                problems.append(f"monitors.vorticity_s[{i}]: must lie in [-2, 2] so that s + 2 <= 4")

    sd = doc.get("smallness", {})
    c0 = _num(problems, "smallness.c0", sd.get("c0", cfg.c0), positive=True)
    c2 = sd.get("c2")
    if c2 is not None:
        c2 = _num(problems, "smallness.c2", c2, positive=True)

    if problems:
        raise ConfigError(problems)
    return RunConfig(
        grid=GridSpec(Lx=float(Lx), Nx=Nx, Ny=Ny, vertical_scheme=scheme),
        system=system, t_end=float(t_end), dt=None if dt is None else float(dt), nonlinear=nonlinear,
        snapshot_every=snap, seed=seed, output_dir=out_dir, data=name, data_params=dict(params),
        a=float(a), lam=float(lam), mu=float(mu), R=None if R is None else float(R),
        eps=None if eps is None else float(eps),
        eps_list=None if eps_list is None else [float(e) for e in eps_list],
        monitors=list(kinds), vorticity_s=[float(s) for s in vs], c0=float(c0),
        c2=None if c2 is None else float(c2),
    )


def loads(text: str) -> RunConfig:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as err:
        raise ConfigError([f"TOML syntax: {err}"]) from err
    return from_dict(doc)


def load(path) -> RunConfig:
    with open(path, "rb") as fh:
        raw = fh.read()
    return loads(raw.decode("utf-8"))


def validate(doc_or_text) -> list[str]:
    """Field-level diagnostics; empty for a valid config.  Never runs physics."""
    try:
        if isinstance(doc_or_text, str):
            loads(doc_or_text)
        else:
            from_dict(doc_or_text)
    except ConfigError as err:
        return list(err.problems)
    return []


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    """Apply CLI overrides and re-validate through the dict form."""
    kw = {k: v for k, v in kw.items() if v is not None}
    return from_dict(replace(cfg, **kw).to_dict())
