"""Command line: exit codes, run outputs and export."""

import json

import pytest

from thinstrip.cli import build_parser, main
from thinstrip.output import read_csv


def write(path, text):
    path.write_text(text)
    return str(path)


class TestCommands:
    def test_help_lists_exit_codes(self):
        text = build_parser().format_help()
        for code in ("0  ok", "2  configuration error", "3  blow-up", "4  analytic band", "5  acceptance"):
            assert code in text
        assert "THINSTRIP_WORKERS" in text

    def test_validate(self, tmp_path, capsys):
        ok = write(tmp_path / "ok.toml", "schema_version = 1\n")
        bad = write(tmp_path / "bad.toml", 'schema_version = 1\n[run]\nsystem = "anisotropic"\n')
        assert main(["validate", ok]) == 0
        assert main(["validate", bad]) == 2
        assert "eps.value: required" in capsys.readouterr().err

    def test_simulate_and_export(self, tmp_path):
        out = tmp_path / "run"
        code = main(["simulate", "--system", "hydrostatic", "--data", "gauss-sine", "--t-end", "1",
                     "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        steps = report["steps"]
        assert (out / "figures" / "clock.png").exists()
        assert main(["export", str(out), "--format", "json"]) == 0
        led = json.loads((out / "export_json" / "ledger.json").read_text())
        assert led["rows"] == steps and len(led["columns"]["t"]) == steps
        assert main(["export", str(out), "--format", "csv", "--out", str(tmp_path / "csv")]) == 0
        assert len(read_csv(tmp_path / "csv" / "ledger.csv")) == steps

    def test_band_exhaustion_exit(self, tmp_path):
        cfg = write(tmp_path / "c.toml", "schema_version = 1\n[band]\na = 0.02\n[data.params]\namplitude = 1.0\n"
                                         "[run]\nt_end = 2.0\ndt = 0.01\n")
        assert main(["simulate", "-c", cfg, "--out", str(tmp_path / "r"), "--no-figures"]) == 4
        report = json.loads((tmp_path / "r" / "report.json").read_text())
        assert report["event"]["event"] == "band-exhausted"

    def test_config_error_exit(self, tmp_path):
        assert main(["simulate", "--system", "anisotropic", "--out", str(tmp_path / "x")]) == 2
        assert main(["simulate", "-c", str(tmp_path / "missing.toml")]) == 2

    def test_sweep(self, tmp_path, capsys):
        cfg = write(tmp_path / "s.toml", "schema_version = 1\n[grid]\nNx = 16\nNy = 17\n"
                                         "[data.params]\namplitude = 0.01\n")
        code = main(["sweep", "-c", cfg, "--eps", "0.2,0.1,0.05", "--t-end", "0.25", "--out", str(tmp_path / "sw"),
                     "--no-gate"])
        assert code == 0
        summary = json.loads((tmp_path / "sw" / "sweep.json").read_text())
        assert summary["sweep"]["slope"] is not None
        assert len(read_csv(tmp_path / "sw" / "sweep.csv")) == 3
        assert "slope =" in capsys.readouterr().out

    def test_sweep_needs_three_eps(self, tmp_path):
        assert main(["sweep", "--eps", "0.1,0.05", "--out", str(tmp_path / "sw")]) == 2

    def test_check_suite(self, tmp_path, capsys):
        assert main(["check", "--suite", "lp", "--workdir", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 4

    @pytest.mark.parametrize("argv", [["simulate", "--system", "bogus"], ["export"]])
    def test_usage_errors(self, argv):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2
