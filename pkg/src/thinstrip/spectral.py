"""Fields on the periodic strip ``[0, Lx) x (0, 1)``.

A :class:`Field2D` stores horizontal Fourier coefficients at the vertical
collocation points.  The horizontal transform is normalised so that

    f(x, y) = sum_m c_m(y) exp(i xi_m x),      xi_m = 2 pi m / Lx,

i.e. ``c = fft(f) / Nx``.  With this convention ``cos(2 pi x / Lx)`` has
coefficient 1/2 on ``m = +-1`` and Parseval reads

    (1/Lx) int |f|^2 dx = sum_m |c_m|^2,

so every ``L^2`` norm in the package is taken per unit horizontal period.

Coefficients are kept in numpy's full ``fft`` ordering.  The Nyquist mode
``m = -Nx/2`` survives ``transform``/``inverse_transform`` but is annihilated by
``d_dx`` and by the dealiased product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np

from thinstrip.vertical import SCHEMES, VerticalOperators, vertical_operators


class GridMismatchError(ValueError):
    pass


class DyadicRangeError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    Lx: float = 2 * np.pi
    Nx: int = 64
    Ny: int = 33
    vertical_scheme: str = "chebyshev"

    def __post_init__(self):
        if not (self.Lx > 0 and np.isfinite(self.Lx)):
            raise ValueError(f"Lx must be positive, got {self.Lx}")
        if self.Nx < 8 or self.Nx % 2:
            raise ValueError(f"Nx must be even and >= 8, got {self.Nx}")
        if self.Ny < 9:
            raise ValueError(f"Ny must be >= 9, got {self.Ny}")
        if self.vertical_scheme not in SCHEMES:
            raise ValueError(f"vertical_scheme must be one of {SCHEMES}, got {self.vertical_scheme!r}")

    @cached_property
    def vops(self) -> VerticalOperators:
        return vertical_operators(self.Ny, self.vertical_scheme)

    @cached_property
    def xi(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.Nx, d=1.0 / self.Nx) / self.Lx

    @cached_property
    def abs_xi(self) -> np.ndarray:
        return np.abs(self.xi)

    @cached_property
    def nyquist(self) -> int:
        return self.Nx // 2

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.Nx) * self.Lx / self.Nx

    @property
    def y(self) -> np.ndarray:
        return self.vops.y

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Nx, self.Ny)

    def to_dict(self) -> dict:
        return {"Lx": float(self.Lx), "Nx": int(self.Nx), "Ny": int(self.Ny),
                "vertical_scheme": self.vertical_scheme}


@dataclass(frozen=True, eq=False)
class Field2D:
    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.grid.shape:
            raise GridMismatchError(f"coefficient shape {c.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("field contains non-finite coefficients")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field2D":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def values(self) -> np.ndarray:
        return inverse_transform(self)

    def _check(self, other: "Field2D"):
        if other.grid != self.grid:
            raise GridMismatchError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field2D):
            self._check(other)
            return Field2D(self.grid, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Field2D):
            self._check(other)
            return Field2D(self.grid, self.coeffs - other.coeffs)
        return NotImplemented

    def __neg__(self):
        return Field2D(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return Field2D(self.grid, self.coeffs * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        """``L^2`` norm per unit horizontal period times ``L^2(0,1)``."""
        e = (np.abs(self.coeffs) ** 2) @ self.grid.vops.weights
        return float(np.sqrt(max(e.sum(), 0.0)))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        c = self.coeffs
        mirrored = np.conj(c[(-np.arange(self.grid.Nx)) % self.grid.Nx])
        return bool(np.max(np.abs(c - mirrored), initial=0.0) <= tol * max(1.0, np.abs(c).max(initial=0.0)))


# ---------------------------------------------------------------------------
# transforms and derivatives
# ---------------------------------------------------------------------------


def transform(grid: GridSpec, values: np.ndarray) -> Field2D:
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise GridMismatchError(f"physical data of shape {values.shape} does not match grid {grid.shape}")
    if np.iscomplexobj(values) and np.any(values.imag != 0):
        raise ValueError("physical data must be real")
    return Field2D(grid, np.fft.fft(values.real, axis=0) / grid.Nx)


def inverse_transform(f: Field2D) -> np.ndarray:
    return np.fft.ifft(f.coeffs * f.grid.Nx, axis=0).real


def from_function(grid: GridSpec, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> Field2D:
    X, Y = grid.mesh()
    return transform(grid, np.broadcast_to(func(X, Y), grid.shape))


def _ddx_symbol(grid: GridSpec) -> np.ndarray:
    s = 1j * grid.xi
    s[grid.nyquist] = 0.0
    return s


def d_dx(f: Field2D) -> Field2D:
    return Field2D(f.grid, f.coeffs * _ddx_symbol(f.grid)[:, None])


def d_dy(f: Field2D) -> Field2D:
    return Field2D(f.grid, f.coeffs @ f.grid.vops.D.T)


def d2_dy2(f: Field2D) -> Field2D:
    return Field2D(f.grid, f.coeffs @ f.grid.vops.D2.T)


def integral_y_from_0(f: Field2D) -> Field2D:
    """Return ``y -> int_0^y f(., s) ds``."""
    return Field2D(f.grid, f.coeffs @ f.grid.vops.I0.T)


def mean_y_coeffs(f: Field2D) -> np.ndarray:
    return f.coeffs @ f.grid.vops.weights


def mean_y(f: Field2D) -> np.ndarray:
    """Physical horizontal profile ``x -> int_0^1 f(x, y) dy``."""
    return np.fft.ifft(mean_y_coeffs(f) * f.grid.Nx).real


# ---------------------------------------------------------------------------
# Littlewood-Paley cutoffs
# ---------------------------------------------------------------------------


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C^infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def bump(z: np.ndarray) -> np.ndarray:
    """Radial profile equal to 1 on ``|z| <= 3/4`` and 0 on ``|z| >= 4/3``."""
    r = np.abs(np.asarray(z, dtype=float))
    return 1.0 - _smooth_step((r - 0.75) / (4.0 / 3.0 - 0.75))


def _default_psi(z):
    return bump(z)


def _default_phi(z):
    z = np.asarray(z, dtype=float)
    return bump(z / 2.0) - bump(z)


@dataclass(frozen=True)
class CutoffPair:
    psi: Callable[[np.ndarray], np.ndarray] = _default_psi
    phi: Callable[[np.ndarray], np.ndarray] = _default_phi


DEFAULT_CUTOFFS = CutoffPair()


def dyadic_range(grid: GridSpec) -> tuple[int, int]:
    """Blocks whose support meets the nonzero resolved wavenumbers.

    Every block outside the returned range vanishes identically on the grid,
    and ``S_{q_min}`` keeps only the horizontal mean (``xi = 0``).
    """
    xi_min = 2 * np.pi / grid.Lx
    xi_max = np.pi * grid.Nx / grid.Lx
    q_min = int(np.floor(np.log2(3.0 * xi_min / 8.0))) - 1
    while 8.0 / 3.0 * 2.0**q_min <= xi_min:
        q_min += 1
    q_max = int(np.ceil(np.log2(4.0 * xi_max / 3.0))) + 1
    while 0.75 * 2.0**q_max >= xi_max:
        q_max -= 1
    return q_min, q_max


@dataclass(frozen=True)
class DyadicTable:
    q_min: int
    q_max: int
    phi: np.ndarray  # (n_blocks, Nx)
    psi_low: np.ndarray  # psi(2^{-q_min} |xi|)

    @property
    def qs(self) -> np.ndarray:
        return np.arange(self.q_min, self.q_max + 1)

    def row(self, q: int) -> np.ndarray:
        return self.phi[q - self.q_min]


@lru_cache(maxsize=64)
def dyadic_table(grid: GridSpec, cutoffs: CutoffPair = DEFAULT_CUTOFFS) -> DyadicTable:
    q_min, q_max = dyadic_range(grid)
    qs = np.arange(q_min, q_max + 1)
    ax = grid.abs_xi
    phi = np.array([cutoffs.phi(ax / 2.0**q) for q in qs])
    psi_low = np.asarray(cutoffs.psi(ax / 2.0**q_min), dtype=float)
    phi.setflags(write=False)
    psi_low.setflags(write=False)
    return DyadicTable(q_min, q_max, phi, psi_low)


def _check_q(grid: GridSpec, q: int, lo: int, hi: int, what: str):
    if not (lo <= q <= hi):
        raise DyadicRangeError(f"{what} index q={q} outside resolvable range [{lo}, {hi}] for {grid}")


def dyadic_project(f: Field2D, q: int, cutoffs: CutoffPair = DEFAULT_CUTOFFS) -> Field2D:
    tab = dyadic_table(f.grid, cutoffs)
    _check_q(f.grid, q, tab.q_min, tab.q_max, "block")
    return Field2D(f.grid, f.coeffs * tab.row(q)[:, None])


def low_pass(f: Field2D, q: int, cutoffs: CutoffPair = DEFAULT_CUTOFFS) -> Field2D:
    tab = dyadic_table(f.grid, cutoffs)
    _check_q(f.grid, q, tab.q_min - 1, tab.q_max + 1, "low-pass")
    mult = np.asarray(cutoffs.psi(f.grid.abs_xi / 2.0**q), dtype=float)
    return Field2D(f.grid, f.coeffs * mult[:, None])


@dataclass(frozen=True)
class DyadicLadder:
    q_min: int
    q_max: int
    blocks: dict[int, Field2D]
    low: Field2D

    def reconstruct(self) -> Field2D:
        c = self.low.coeffs.copy()
        for b in self.blocks.values():
            c += b.coeffs
        return Field2D(self.low.grid, c)

    def low_upto(self, q: int) -> Field2D:
        """``S_q f = low + sum_{q' < q} Delta_{q'} f`` for ``q`` in the ladder range."""
        c = self.low.coeffs.copy()
        for qq, b in self.blocks.items():
            if qq < q:
                c += b.coeffs
        return Field2D(self.low.grid, c)


def ladder(f: Field2D, cutoffs: CutoffPair = DEFAULT_CUTOFFS) -> DyadicLadder:
    tab = dyadic_table(f.grid, cutoffs)
    blocks = {int(q): Field2D(f.grid, f.coeffs * tab.row(int(q))[:, None]) for q in tab.qs}
    low = Field2D(f.grid, f.coeffs * tab.psi_low[:, None])
    return DyadicLadder(tab.q_min, tab.q_max, blocks, low)


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------


def _pad(c: np.ndarray, n: int, m: int) -> np.ndarray:
    h = n // 2
    out = np.zeros((m,) + c.shape[1:], dtype=complex)
    out[:h] = c[:h]
    out[m - h + 1 :] = c[h + 1 :]
    return out


def _truncate(c: np.ndarray, n: int) -> np.ndarray:
    h = n // 2
    m = c.shape[0]
    out = np.zeros((n,) + c.shape[1:], dtype=complex)
    out[:h] = c[:h]
    out[h + 1 :] = c[m - h + 1 :]
    return out


def multiply_coeffs(a: np.ndarray, b: np.ndarray, nx: int) -> np.ndarray:
    """Dealiased (3/2 rule) product of coefficient arrays along axis 0."""
    m = 3 * nx // 2
    pa = np.fft.ifft(_pad(a, nx, m), axis=0) * m
    pb = np.fft.ifft(_pad(b, nx, m), axis=0) * m
    prod = np.fft.fft(pa * pb, axis=0) / m
    return _truncate(prod, nx)


def multiply(f: Field2D, g: Field2D) -> Field2D:
    if f.grid != g.grid:
        raise GridMismatchError("cannot multiply fields on different grids")
    return Field2D(f.grid, multiply_coeffs(f.coeffs, g.coeffs, f.grid.Nx))


# ---------------------------------------------------------------------------
# random fields for property checks
# ---------------------------------------------------------------------------


def random_field(grid: GridSpec, rng: np.random.Generator, *, kmax: int | None = None,
                 dirichlet: bool = False, decay: float = 0.0) -> Field2D:
    """Random real field with modes ``|m| <= kmax`` (Nyquist always excluded).

    With ``dirichlet=True`` the vertical profiles are random sine series and
    vanish at both walls.  ``decay`` damps mode ``m`` by ``exp(-decay |m|)``.
    """
    kmax = grid.Nx // 2 - 1 if kmax is None else min(kmax, grid.Nx // 2 - 1)
    y = grid.y
    c = np.zeros(grid.shape, dtype=complex)
    for m in range(0, kmax + 1):
        if dirichlet:
            n = np.arange(1, 6)
            amps = rng.standard_normal((2, n.size)) / n
            prof_r = np.sin(np.pi * np.outer(n, y)).T @ amps[0]
            prof_i = np.sin(np.pi * np.outer(n, y)).T @ amps[1]
        else:
            prof_r = rng.standard_normal(grid.Ny)
            prof_i = rng.standard_normal(grid.Ny)
        damp = np.exp(-decay * m)
        if m == 0:
            c[0] = prof_r * damp
        else:
            c[m] = 0.5 * (prof_r + 1j * prof_i) * damp
            c[-m] = np.conj(c[m])
    return Field2D(grid, c)
