"""Named initial data: modulated Gaussians in x times Dirichlet profiles in y.

Gaussians are periodised over the horizontal period so the data are exactly
periodic and analytic; every entry passes through ``enforce_compatibility`` so
``int_0^1 u dy = 0`` holds on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from thinstrip.hydro import enforce_compatibility
from thinstrip.spectral import Field2D, GridSpec, transform


class CatalogError(KeyError):
    pass


def periodic_gaussian(x: np.ndarray, Lx: float, center: float, width: float, images: int = 3) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    for k in range(-images, images + 1):
        out += np.exp(-((x - center - k * Lx) ** 2) / (2.0 * width**2))
    return out


def _profile(kind: str, n: int, y: np.ndarray) -> np.ndarray:
    if kind == "sine":
        return np.sin(n * np.pi * y)
    if kind == "poly":
        # odd about y = 1/2, so its depth mean vanishes
        return y * (1.0 - y) * (1.0 - 2.0 * y) * 10.0
    raise CatalogError(f"unknown vertical profile {kind!r}")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    doc: str
    defaults: dict
    build: Callable[[GridSpec, dict], tuple[np.ndarray, np.ndarray]]


def _gauss_sine(grid: GridSpec, p: dict):
    X, Y = grid.mesh()
    c = p["center"] if p["center"] is not None else grid.Lx / 2
    base = periodic_gaussian(X, grid.Lx, c, p["width"]) * _profile("sine", p["mode"], Y)
    return p["amplitude"] * base, p["amplitude"] * p["u1_factor"] * base


def _modulated(grid: GridSpec, p: dict):
    X, Y = grid.mesh()
    c = p["center"] if p["center"] is not None else grid.Lx / 2
    env = periodic_gaussian(X, grid.Lx, c, p["width"]) * np.cos(p["carrier"] * 2 * np.pi / grid.Lx * (X - c))
    base = env * _profile(p["profile"], p["mode"], Y)
    return p["amplitude"] * base, p["amplitude"] * p["u1_factor"] * base


def _gauss_poly(grid: GridSpec, p: dict):
    X, Y = grid.mesh()
    c = p["center"] if p["center"] is not None else grid.Lx / 2
    base = periodic_gaussian(X, grid.Lx, c, p["width"]) * _profile("poly", 0, Y)
    return p["amplitude"] * base, p["amplitude"] * p["u1_factor"] * base


def _zero(grid: GridSpec, p: dict):
    z = np.zeros(grid.shape)
    return z, z


CATALOG: dict[str, CatalogEntry] = {
    "gauss-sine": CatalogEntry(
        "gauss-sine",
        "A g(x) sin(n pi y) with a periodised Gaussian g; u1 = u1_factor * u0",
        {"amplitude": 0.01, "width": 0.5, "center": None, "mode": 2, "u1_factor": 0.0},
        _gauss_sine,
    ),
    "modulated-gauss": CatalogEntry(
        "modulated-gauss",
        "A g(x) cos(k (x - c)) times a sine or odd polynomial profile",
        {"amplitude": 0.01, "width": 0.7, "center": None, "carrier": 2, "profile": "sine", "mode": 2,
         "u1_factor": 0.0},
        _modulated,
    ),
    "gauss-poly": CatalogEntry(
        "gauss-poly",
        "A g(x) 10 y (1 - y) (1 - 2 y)",
        {"amplitude": 0.01, "width": 0.5, "center": None, "u1_factor": 0.0},
        _gauss_poly,
    ),
    "zero": CatalogEntry("zero", "identically zero data", {}, _zero),
}


def resolve_params(name: str, params: dict | None = None) -> dict:
    if name not in CATALOG:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {sorted(CATALOG)}")
    entry = CATALOG[name]
    params = dict(params or {})
    unknown = sorted(set(params) - set(entry.defaults))
    if unknown:
        raise CatalogError(f"unknown parameters for {name!r}: {unknown}")
    return {**entry.defaults, **params}


def initial_data(grid: GridSpec, name: str, params: dict | None = None) -> tuple[Field2D, Field2D]:
    """Compatible ``(u0, u1)`` for the catalog entry ``name``."""
    p = resolve_params(name, params)
    v0, v1 = CATALOG[name].build(grid, p)
    u0, u1 = transform(grid, v0), transform(grid, v1)
    c0, c1 = u0.coeffs.copy(), u1.coeffs.copy()
    c0[grid.nyquist] = 0.0
    c1[grid.nyquist] = 0.0
    return enforce_compatibility(Field2D(grid, c0), Field2D(grid, c1))


def calibrated_amplitude(grid: GridSpec, name: str, params: dict | None, a: float, c0: float,
                         margin: float = 2.0) -> float:
    """Amplitude making the smallness sum equal ``c0 a / margin`` (norms are linear in it)."""
    from thinstrip.energy import smallness_check

    p = resolve_params(name, params)
    if "amplitude" not in p:
        raise CatalogError(f"{name!r} has no amplitude parameter")
    p["amplitude"] = 1.0
    u0, u1 = initial_data(grid, name, p)
    rep = smallness_check(u0, u1, a, c0)
    if rep.total == 0:
        raise CatalogError(f"{name!r} has zero smallness norm at unit amplitude")
    return c0 * a / margin / rep.total
