"""Spectral lab for hyperbolic Navier-Stokes in a thin strip and its hydrostatic limit."""

__version__ = "0.1.0"

from thinstrip.spectral import Field2D, GridSpec  # noqa: E402

__all__ = ["Field2D", "GridSpec", "__version__"]
