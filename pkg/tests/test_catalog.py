"""Catalog of initial data."""

import numpy as np
import pytest

from thinstrip.catalog import CATALOG, CatalogError, initial_data, periodic_gaussian, resolve_params
from thinstrip.spectral import GridSpec, mean_y_coeffs

G = GridSpec(Nx=32, Ny=17)


class TestCatalog:
    @pytest.mark.parametrize("name", sorted(CATALOG))
    def test_entries_are_compatible(self, name):
        u0, u1 = initial_data(G, name)
        for f in (u0, u1):
            assert np.abs(mean_y_coeffs(f)).max() < 1e-14
            assert np.abs(f.values()[:, [0, -1]]).max() < 1e-12
            assert np.all(f.coeffs[G.nyquist] == 0)

    def test_unknown_entry(self):
        with pytest.raises(CatalogError):
            initial_data(G, "vortex-sheet")

    def test_unknown_parameter(self):
        with pytest.raises(CatalogError):
            resolve_params("gauss-sine", {"amplitud": 1.0})

    def test_periodic_gaussian_is_periodic(self):
        x = np.linspace(0, 2 * np.pi, 9)
        g = periodic_gaussian(x, 2 * np.pi, np.pi, 0.5)
        assert g[0] == pytest.approx(g[-1], rel=1e-12)
        assert g.argmax() == 4
