"""Vertical discretisation of the unit interval (0, 1).

Two schemes are available:

* ``chebyshev``: Chebyshev-Gauss-Lobatto collocation, ``y_j = (1 - cos(pi j/N))/2``
  ordered from the bottom wall (``j = 0``) to the top wall (``j = N``).
* ``fd2``: uniform grid with second-order finite differences.

Every scheme provides a first derivative matrix, a second derivative matrix,
an integration matrix ``I0`` with ``(I0 f)(y) = int_0^y f`` and quadrature
weights (Clenshaw-Curtis resp. trapezoid) such that ``w @ f = int_0^1 f``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

SCHEMES = ("chebyshev", "fd2")


@dataclass(frozen=True)
class VerticalOperators:
    y: np.ndarray
    D: np.ndarray
    D2: np.ndarray
    I0: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.y.size


def _cheb_diff(n_pts: int) -> tuple[np.ndarray, np.ndarray]:
    """Differentiation matrix on Gauss-Lobatto points x_j = cos(pi j / N)."""
    N = n_pts - 1
    j = np.arange(n_pts)
    x = np.cos(np.pi * j / N)
    c = np.ones(n_pts)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** j
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(n_pts))
    # negative-sum trick keeps D @ const = 0 to roundoff
    D -= np.diag(D.sum(axis=1))
    return x, D


def _chebyshev(n_pts: int) -> VerticalOperators:
    x, Dx = _cheb_diff(n_pts)
    y = (1.0 - x) / 2.0
    y[0], y[-1] = 0.0, 1.0
    D = -2.0 * Dx
    D2 = D @ D
    D2 -= np.diag(D2.sum(axis=1))

    N = n_pts - 1
    V = C.chebvander(x, N)
    Vinv = np.linalg.inv(V)
    # antiderivative of each basis polynomial, anchored at x = 1 (y = 0)
    integ = np.zeros((N + 2, N + 1))
    for k in range(N + 1):
        e = np.zeros(N + 1)
        e[k] = 1.0
        integ[:, k] = C.chebint(e, lbnd=1.0)
    I0 = -0.5 * C.chebvander(x, N + 1) @ integ @ Vinv
    I0[0, :] = 0.0
    weights = I0[-1, :].copy()
    return VerticalOperators(y=y, D=D, D2=D2, I0=I0, weights=weights)


def _finite_difference(n_pts: int) -> VerticalOperators:
    y = np.linspace(0.0, 1.0, n_pts)
    h = y[1] - y[0]
    D = np.zeros((n_pts, n_pts))
    D2 = np.zeros((n_pts, n_pts))
    for j in range(1, n_pts - 1):
        D[j, j - 1], D[j, j + 1] = -0.5 / h, 0.5 / h
        D2[j, j - 1 : j + 2] = np.array([1.0, -2.0, 1.0]) / h**2
    D[0, :3] = np.array([-1.5, 2.0, -0.5]) / h
    D[-1, -3:] = np.array([0.5, -2.0, 1.5]) / h
    D2[0, :4] = np.array([2.0, -5.0, 4.0, -1.0]) / h**2
    D2[-1, -4:] = np.array([-1.0, 4.0, -5.0, 2.0]) / h**2

    I0 = np.zeros((n_pts, n_pts))
    for j in range(1, n_pts):
        I0[j] = I0[j - 1]
        I0[j, j - 1] += 0.5 * h
        I0[j, j] += 0.5 * h
    weights = I0[-1, :].copy()
    return VerticalOperators(y=y, D=D, D2=D2, I0=I0, weights=weights)


@lru_cache(maxsize=32)
def vertical_operators(n_pts: int, scheme: str = "chebyshev") -> VerticalOperators:
    if scheme == "chebyshev":
        ops = _chebyshev(n_pts)
    elif scheme == "fd2":
        ops = _finite_difference(n_pts)
    else:
        raise ValueError(f"unknown vertical scheme {scheme!r}; expected one of {SCHEMES}")
    for arr in (ops.y, ops.D, ops.D2, ops.I0, ops.weights):
        arr.setflags(write=False)
    return ops
