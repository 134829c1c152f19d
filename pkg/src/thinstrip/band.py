"""Analytic weights ``exp((a - rate * clock) |D_x|)`` and their band-loss clocks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from thinstrip.spectral import Field2D, GridSpec

CLOCK_KINDS = ("theta", "tau", "eta")
MAX_EXPONENT = 300.0


class BandExhaustedError(RuntimeError):
    def __init__(self, message: str, crossing_time: float | None = None):
        super().__init__(message)
        self.crossing_time = crossing_time


class WeightOverflowError(ValueError):
    pass


class ClockInvariantError(ValueError):
    pass


@dataclass
class AnalyticBandState:
    """Band width ``a - rate * clock`` and the clock history.

    The state is owned and mutated by a single solver; callers that need a
    frozen view use :meth:`snapshot`.
    """

    a: float
    rate: float
    kind: str = "theta"
    clock: float = 0.0
    t: float = 0.0
    history: list[tuple[float, float]] = field(default_factory=lambda: [(0.0, 0.0)])
    exhausted_at: float | None = None

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"band width a must be positive, got {self.a}")
        if self.rate <= 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.kind not in CLOCK_KINDS:
            raise ValueError(f"clock kind must be one of {CLOCK_KINDS}")

    @property
    def width(self) -> float:
        return self.a - self.rate * self.clock

    @property
    def positive(self) -> bool:
        return self.width > 0

    def snapshot(self) -> "AnalyticBandState":
        return AnalyticBandState(self.a, self.rate, self.kind, self.clock, self.t,
                                 list(self.history), self.exhausted_at)


def check_weight_range(grid: GridSpec, width: float):
    expo = abs(width) * float(grid.abs_xi.max())
    if expo > MAX_EXPONENT:
        raise WeightOverflowError(
            f"analytic weight exponent {expo:.1f} exceeds {MAX_EXPONENT}; reduce a, Lx/Nx resolution or the band"
        )


def weight_multiplier(grid: GridSpec, width: float) -> np.ndarray:
    check_weight_range(grid, width)
    return np.exp(width * grid.abs_xi)


def analytic_weight(f: Field2D, width: float) -> Field2D:
    """Multiply mode ``xi`` by ``exp(width * |xi|)``; negative widths invert."""
    return Field2D(f.grid, f.coeffs * weight_multiplier(f.grid, width)[:, None])


def apply_weight(f: Field2D, band: AnalyticBandState, inverse: bool = False) -> Field2D:
    if band.width < 0:
        raise BandExhaustedError(
            f"{band.kind} band exhausted (width {band.width:.3e})", crossing_time=band.exhausted_at
        )
    return analytic_weight(f, -band.width if inverse else band.width)


def plus_abs(f: Field2D) -> Field2D:
    """``f^+``: the field whose horizontal spectrum is ``|f_hat|``."""
    return Field2D(f.grid, np.abs(f.coeffs).astype(complex))


def step_clock(band: AnalyticBandState, driver_norm: float, dt: float) -> AnalyticBandState:
    """Advance the clock by ``driver_norm * dt``.

    ``driver_norm`` is the driver evaluated at the step midpoint, so the update
    is the midpoint quadrature of the clock ODE.  Crossing ``a / rate`` is
    recorded in ``exhausted_at`` (linear interpolation inside the step).
    """
    if not np.isfinite(driver_norm) or driver_norm < 0:
        raise ClockInvariantError(f"clock driver must be finite and nonnegative, got {driver_norm}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    old = band.clock
    band.clock = old + driver_norm * dt
    band.t = band.t + dt
    band.history.append((band.t, band.clock))
    limit = band.a / band.rate
    if band.exhausted_at is None and band.clock >= limit:
        frac = (limit - old) / (band.clock - old) if band.clock > old else 1.0
        band.exhausted_at = band.t - dt + frac * dt
    return band


def convexity_check(xi: float, eta_freq: float, band: AnalyticBandState) -> bool:
    """Subadditivity ``phi(xi) <= phi(xi - eta) + phi(eta)`` of the linear weight."""
    if band.width < 0:
        raise BandExhaustedError("band nonpositive", crossing_time=band.exhausted_at)
    w = band.width
    lhs = w * abs(xi)
    rhs = w * abs(xi - eta_freq) + w * abs(eta_freq)
    return lhs <= rhs + 1e-12 * max(1.0, abs(rhs))


def clock_rows(band: AnalyticBandState) -> list[tuple[float, float, float]]:
    return [(t, c, band.a - band.rate * c) for t, c in band.history]
