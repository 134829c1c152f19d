"""Anisotropic Besov norms, Chemin-Lerner accumulators and Bony's decomposition.

Block norms are ``||Delta_q f||_{L^2}`` with the per-period horizontal
normalisation of :mod:`thinstrip.spectral` and the vertical quadrature of the
grid (Clenshaw-Curtis on Chebyshev points, trapezoid for finite differences).

The horizontal mean (``xi = 0``) is invisible to every ``Delta_q``.  On the
periodic strip it is carried by the low block ``S_{q_min}`` and enters the
norms with unit weight, so that ``||f||_{B^s} = 0`` only for ``f = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from thinstrip.spectral import (
    DEFAULT_CUTOFFS,
    CutoffPair,
    Field2D,
    GridMismatchError,
    GridSpec,
    dyadic_table,
    ladder,
    multiply,
)

S_RANGE = (-2.0, 4.0)


class LadderRangeError(ValueError):
    pass


def _as_list(fields) -> list[Field2D]:
    if isinstance(fields, Field2D):
        return [fields]
    out = list(fields)
    if not out:
        raise ValueError("need at least one field")
    g = out[0].grid
    if any(f.grid != g for f in out):
        raise GridMismatchError("fields in a group must share a grid")
    return out


def mode_energy(coeff_arrays: Sequence[np.ndarray], grid: GridSpec, scale: Sequence[float] | None = None) -> np.ndarray:
    """``e_m = sum_k scale_k^2 int_0^1 |c^k_m(y)|^2 dy`` for each horizontal mode."""
    w = grid.vops.weights
    e = np.zeros(grid.Nx)
    for k, c in enumerate(coeff_arrays):
        s = 1.0 if scale is None else scale[k]
        e += (s * s) * ((np.abs(c) ** 2) @ w)
    return np.maximum(e, 0.0)


def block_norms_from_energy(e: np.ndarray, grid: GridSpec,
                            cutoffs: CutoffPair = DEFAULT_CUTOFFS) -> tuple[np.ndarray, float]:
    """Return (``||Delta_q f||`` for each ladder block, ``||S_{q_min} f||``)."""
    tab = dyadic_table(grid, cutoffs)
    blocks = np.sqrt(np.maximum((tab.phi**2) @ e, 0.0))
    low = float(np.sqrt(max((tab.psi_low**2) @ e, 0.0)))
    return blocks, low


def block_norms(fields, cutoffs: CutoffPair = DEFAULT_CUTOFFS) -> tuple[np.ndarray, float]:
    fs = _as_list(fields)
    grid = fs[0].grid
    return block_norms_from_energy(mode_energy([f.coeffs for f in fs], grid), grid, cutoffs)


def besov_weights(grid: GridSpec, s: float, cutoffs: CutoffPair = DEFAULT_CUTOFFS) -> np.ndarray:
    tab = dyadic_table(grid, cutoffs)
    return 2.0 ** (tab.qs * s)


@dataclass(frozen=True)
class BesovReport:
    s: float
    per_block: dict[int, float]
    low: float
    total: float


def _check_s(s: float):
    if not (S_RANGE[0] <= s <= S_RANGE[1]):
        raise ValueError(f"Besov index s={s} outside supported range {S_RANGE}")


def besov_norm(fields, s: float, cutoffs: CutoffPair = DEFAULT_CUTOFFS) -> BesovReport:
    """``sum_q 2^{qs} ||Delta_q f||_{L^2}`` plus the horizontal-mean block.

    A sequence of fields is treated as a vector field, e.g. ``(u, eps * v)``.
    """
    _check_s(s)
    fs = _as_list(fields)
    grid = fs[0].grid
    blocks, low = block_norms(fs, cutoffs)
    weighted = besov_weights(grid, s, cutoffs) * blocks
    tab = dyadic_table(grid, cutoffs)
    per_block = {int(q): float(v) for q, v in zip(tab.qs, weighted)}
    return BesovReport(s, per_block, low, float(low + weighted.sum()))


def besov_total_from_energy(e: np.ndarray, grid: GridSpec, s: float) -> float:
    blocks, low = block_norms_from_energy(e, grid)
    return float(low + besov_weights(grid, s) @ blocks)


# ---------------------------------------------------------------------------
# Chemin-Lerner accumulators
# ---------------------------------------------------------------------------


@dataclass
class CheminLernerAccumulator:
    """Running ``sum_q 2^{qs} (int_0^T delta ||Delta_q f||^p dt)^{1/p}``.

    ``p`` is 2 or ``inf``.  The time norm is taken block by block before the
    ``l^1`` sum.  Per-block streams are kept; ``keep_snapshots`` additionally
    stores every block-norm vector for oracle checks.
    """

    s: float
    p: float
    n_blocks: int
    values: np.ndarray = None
    low: float = 0.0
    last_t: float | None = None
    keep_snapshots: bool = False
    snapshots: list[tuple[float, np.ndarray, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.p not in (2, np.inf):
            raise ValueError("only p = 2 and p = inf are supported")
        if self.values is None:
            self.values = np.zeros(self.n_blocks)


def new_accumulator(grid: GridSpec, s: float, p: float, keep_snapshots: bool = False) -> CheminLernerAccumulator:
    _check_s(s)
    tab = dyadic_table(grid)
    return CheminLernerAccumulator(s=s, p=p, n_blocks=len(tab.qs), keep_snapshots=keep_snapshots)


def cl_update_norms(acc: CheminLernerAccumulator, blocks: np.ndarray, low: float, t: float, dt: float,
                    delta: float = 1.0) -> CheminLernerAccumulator:
    if acc.last_t is not None and t < acc.last_t:
        raise ValueError(f"non-monotone time stamp {t} after {acc.last_t}")
    if delta < 0:
        raise ValueError("time weight delta must be nonnegative")
    acc.last_t = t
    if acc.p == np.inf:
        np.maximum(acc.values, blocks, out=acc.values)
        acc.low = max(acc.low, low)
    else:
        acc.values += delta * dt * blocks**2
        acc.low += delta * dt * low**2
    if acc.keep_snapshots:
        acc.snapshots.append((t, blocks.copy(), low))
    return acc


def cl_update(acc: CheminLernerAccumulator, f, t: float, dt: float, delta: float = 1.0) -> CheminLernerAccumulator:
    blocks, low = block_norms(f)
    return cl_update_norms(acc, blocks, low, t, dt, delta)


def cl_block_values(acc: CheminLernerAccumulator) -> tuple[np.ndarray, float]:
    if acc.p == np.inf:
        return acc.values.copy(), acc.low
    return np.sqrt(acc.values), float(np.sqrt(acc.low))


def cl_total(acc: CheminLernerAccumulator, grid: GridSpec) -> float:
    blocks, low = cl_block_values(acc)
    return float(low + besov_weights(grid, acc.s) @ blocks)


# ---------------------------------------------------------------------------
# Bony decomposition
# ---------------------------------------------------------------------------


def _active_blocks(f: Field2D, tol: float = 0.0) -> set[int]:
    blocks, _ = block_norms(f)
    tab = dyadic_table(f.grid)
    scale = max(f.l2_norm(), 1e-300)
    return {int(q) for q, b in zip(tab.qs, blocks) if b > tol * scale}


def bony_decompose(f: Field2D, g: Field2D, q_range: tuple[int, int] | None = None):
    """Split ``f g`` into ``T_f g``, ``T_g f`` and ``R(f, g)``.

    ``T_f g = sum_q S_{q-1} f Delta_q g`` and
    ``R(f, g) = sum_q (Delta_{q-1} + Delta_q + Delta_{q+1}) f Delta_q g``.
    On the periodic strip the product of the two horizontal means is added to
    the remainder so the three pieces reassemble the dealiased product.
    """
    if f.grid != g.grid:
        raise GridMismatchError("Bony decomposition needs a shared grid")
    lf, lg = ladder(f), ladder(g)
    if q_range is not None:
        lo, hi = q_range
        needed = _active_blocks(f) | _active_blocks(g)
        missing = sorted(q for q in needed if q < lo or q > hi)
        if missing:
            raise LadderRangeError(f"ladder range [{lo}, {hi}] misses active blocks {missing}")
    qs = sorted(lf.blocks)
    zero = Field2D.zeros(f.grid)
    Tfg = zero
    Tgf = zero
    R = multiply(lf.low, lg.low)
    for q in qs:
        S_f = lf.low_upto(q - 1)
        S_g = lg.low_upto(q - 1)
        Tfg = Tfg + multiply(S_f, lg.blocks[q])
        Tgf = Tgf + multiply(S_g, lf.blocks[q])
        wide = lf.blocks[q]
        if q - 1 in lf.blocks:
            wide = wide + lf.blocks[q - 1]
        if q + 1 in lf.blocks:
            wide = wide + lf.blocks[q + 1]
        R = R + multiply(wide, lg.blocks[q])
    return Tfg, Tgf, R


# ---------------------------------------------------------------------------
# vertical inequalities
# ---------------------------------------------------------------------------


def vertical_l2(profile: np.ndarray, grid: GridSpec) -> float:
    return float(np.sqrt(max(grid.vops.weights @ (np.abs(profile) ** 2), 0.0)))


def agmon_ratio(profile: np.ndarray, grid: GridSpec) -> float:
    """``||f||_inf / (||f||^{1/2} ||f'||^{1/2})`` for a real vertical profile."""
    df = grid.vops.D @ profile
    denom = np.sqrt(vertical_l2(profile, grid) * vertical_l2(df, grid))
    return float(np.max(np.abs(profile)) / denom)


def poincare_ratio(profile: np.ndarray, grid: GridSpec) -> float:
    """``||f|| / ||f'||``; bounded by ``1/pi`` for profiles vanishing at both walls."""
    return vertical_l2(profile, grid) / vertical_l2(grid.vops.D @ profile, grid)


def low_frequency_dominance(f: Field2D, s: float = 0.5) -> float:
    """Measured ``max_q ||S_{q-1} f||_inf / ||d_y f||_{B^{1/2}}``."""
    from thinstrip.spectral import d_dy

    lad = ladder(f)
    ref = besov_norm(d_dy(f), s).total
    if ref == 0:
        return 0.0
    best = 0.0
    for q in lad.blocks:
        best = max(best, float(np.abs(lad.low_upto(q - 1).values()).max()))
    return best / ref
