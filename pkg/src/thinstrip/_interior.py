"""Array-level helpers shared by the two time steppers.

The steppers only evolve interior vertical values; wall rows stay exactly
zero.  ``Interior.project`` removes the weighted vertical mean on interior
rows, which is the discrete counterpart of the y-independent pressure force
that keeps ``int_0^1 u dy = 0``.
"""

from __future__ import annotations

import numpy as np

from thinstrip.spectral import GridSpec, multiply_coeffs


class BlowUpError(RuntimeError):
    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class StepSizeError(ValueError):
    pass


class CompatibilityError(ValueError):
    pass


class Interior:
    def __init__(self, grid: GridSpec):
        self.grid = grid
        ops = grid.vops
        self.n = grid.Ny - 2
        self.D = np.asarray(ops.D)
        self.D2 = np.asarray(ops.D2)
        self.I0 = np.asarray(ops.I0)
        self.w = np.asarray(ops.weights)
        self.w_int = self.w[1:-1]
        self.w_sum = float(self.w_int.sum())
        self.ddx = 1j * grid.xi
        self.ddx[grid.nyquist] = 0.0
        self.proj = np.eye(self.n) - np.outer(np.ones(self.n), self.w_int) / self.w_sum

    def mean(self, c_int: np.ndarray) -> np.ndarray:
        """Weighted vertical mean of interior values; ``c_int`` has shape (Nx, n)."""
        return (c_int @ self.w_int) / self.w_sum

    def project(self, c_int: np.ndarray) -> np.ndarray:
        return c_int - self.mean(c_int)[:, None]

    def full(self, c_int: np.ndarray) -> np.ndarray:
        out = np.zeros((c_int.shape[0], self.grid.Ny), dtype=complex)
        out[:, 1:-1] = c_int
        return out

    def dy(self, c: np.ndarray) -> np.ndarray:
        return c @ self.D.T

    def dyy(self, c: np.ndarray) -> np.ndarray:
        return c @ self.D2.T

    def dx(self, c: np.ndarray) -> np.ndarray:
        return c * self.ddx[:, None]

    def int0(self, c: np.ndarray) -> np.ndarray:
        return c @ self.I0.T

    def diagnose_v(self, u: np.ndarray) -> np.ndarray:
        return -self.int0(self.dx(u))

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return multiply_coeffs(a, b, self.grid.Nx)

    def advection(self, u: np.ndarray, v: np.ndarray, f: np.ndarray) -> np.ndarray:
        """``u d_x f + v d_y f`` with dealiased products."""
        return self.mul(u, self.dx(f)) + self.mul(v, self.dy(f))


def crank_nicolson(M: np.ndarray, h: float) -> np.ndarray:
    """Propagator ``(I - h M / 2)^{-1} (I + h M / 2)``; works on stacks of matrices."""
    eye = np.eye(M.shape[-1])
    return np.linalg.solve(eye - 0.5 * h * M, eye + 0.5 * h * M)


def check_finite(t: float, *arrays: np.ndarray):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise BlowUpError(f"non-finite values at t={t:.6g}", t)
