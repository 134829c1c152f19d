"""Regression against recorded golden values (see tests/golden/regenerate.py)."""

import json
from pathlib import Path

import pytest

from thinstrip.acceptance import ac8_params
from thinstrip.besov import besov_norm
from thinstrip.catalog import initial_data
from thinstrip.config import RunConfig
from thinstrip.convergence import run_pair
from thinstrip.harness import simulate
from thinstrip.hydro import recover_v

GOLDEN = Path(__file__).parent / "golden"
RTOL = 1e-9


def golden(name):
    return json.loads((GOLDEN / name).read_text())


class TestGolden:
    def test_gauss_sine_hydrostatic_run(self, tmp_path):
        ref = golden("gauss_sine_hydro.json")
        cfg = RunConfig(system="hydrostatic", data="gauss-sine", t_end=5.0, output_dir=str(tmp_path))
        rep = simulate(cfg, figures=False)
        assert rep.summary["steps"] == ref["steps"]
        assert rep.summary["clock_final"] == pytest.approx(ref["theta_final"], rel=RTOL)
        for k, v in ref["ratios"].items():
            assert rep.summary["ledgers"][k]["ratio"] == pytest.approx(v, rel=RTOL)

    def test_diagnosed_v0(self):
        ref = golden("gauss_sine_hydro.json")
        g = RunConfig().grid
        v0 = recover_v(initial_data(g, "gauss-sine")[0])
        assert v0.l2_norm() == pytest.approx(ref["v0_l2"], rel=1e-12)
        assert besov_norm(v0, 0.5).total == pytest.approx(ref["v0_besov_half"], rel=1e-12)

    def test_remainder_norms_at_eps_tenth(self):
        ref = golden("remainder_eps0.1.json")
        rec = run_pair(ac8_params(), 0.1, keep_instant=False)
        assert rec.steps == ref["steps"]
        assert rec.terminal == pytest.approx(ref["terminal"], rel=RTOL)
        for k, v in ref["totals"].items():
            assert rec.totals[k] == pytest.approx(v, rel=RTOL)

    def test_calibration_file_shape(self):
        ref = golden("ratios.json")
        assert set(ref) == {"hydrostatic.hydro", "hydrostatic.vorticity_s0.5", "hydrostatic.vorticity_s1.5",
                            "anisotropic.aniso"}
        for v in ref.values():
            assert v["C_cal"] == pytest.approx(1.05 * v["ratio"])
