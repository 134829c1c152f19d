"""Rewrite the golden files.  Only run after a change has been validated.

    python tests/golden/regenerate.py
"""

import json
import tempfile
from pathlib import Path

from thinstrip.acceptance import ac8_params, calibration_doc, ledger_ratios, ac6_config, ac7_config
from thinstrip.besov import besov_norm
from thinstrip.catalog import initial_data
from thinstrip.config import RunConfig
from thinstrip.convergence import run_pair
from thinstrip.harness import simulate
from thinstrip.hydro import recover_v

HERE = Path(__file__).parent


def dump(name, doc):
    (HERE / name).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        r6 = simulate(ac6_config(tmp / "ac6"), tmp / "ac6", figures=False)
        r7 = simulate(ac7_config(tmp / "ac7"), tmp / "ac7", figures=False)
        dump("ratios.json", calibration_doc(ledger_ratios(("hydrostatic", r6), ("anisotropic", r7))))

        cfg = RunConfig(system="hydrostatic", data="gauss-sine", t_end=5.0, output_dir=str(tmp / "gs"))
        rep = simulate(cfg, figures=False)
        u0, _ = initial_data(cfg.grid, "gauss-sine")
        v0 = recover_v(u0)
        dump("gauss_sine_hydro.json", {
            "theta_final": rep.summary["clock_final"],
            "ratios": {k: v["ratio"] for k, v in rep.summary["ledgers"].items()},
            "steps": rep.summary["steps"],
            "v0_l2": v0.l2_norm(),
            "v0_besov_half": besov_norm(v0, 0.5).total,
        })

    rec = run_pair(ac8_params(), 0.1, keep_instant=False)
    dump("remainder_eps0.1.json", {"terminal": rec.terminal, "totals": rec.totals, "steps": rec.steps})


if __name__ == "__main__":
    main()
