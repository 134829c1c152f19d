"""Float formatting, writers and the manifest."""

import json
import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from thinstrip.output import RunWriter, dumps_csv, dumps_json, fmt_float, read_csv, sha256_file


class TestFormat:
    @given(x=st.floats(allow_nan=False, allow_infinity=False))
    def test_17_digits_round_trip(self, x):
        s = fmt_float(x)
        assert float(s) == x
        mantissa = s.split("e")[0].lstrip("-").replace(".", "")
        assert len(mantissa) == 17

    def test_special_values(self):
        assert [fmt_float(v) for v in (math.nan, math.inf, -math.inf)] == ["nan", "inf", "-inf"]
        assert json.loads(dumps_json({"x": math.nan}))["x"] == "nan"

    def test_json_is_standard(self):
        doc = {"a": 1, "b": [0.1, True, None], "c": {"d": np.float64(2.5)}}
        back = json.loads(dumps_json(doc))
        assert back == {"a": 1, "b": [0.1, True, None], "c": {"d": 2.5}}

    def test_csv_cells(self):
        text = dumps_csv([{"step": 1, "t": 0.5, "ok": True, "note": None}])
        assert text.splitlines() == ["step,t,ok,note", "1,5.0000000000000000e-01,1,"]


class TestWriter:
    def test_manifest_lists_every_file(self, tmp_path):
        w = RunWriter(tmp_path)
        w.csv("a.csv", [{"x": 1.0}])
        w.json("sub/b.json", {"y": 2})
        w.manifest({"k": 1}, {"run": 0.1})
        man = json.loads((tmp_path / "manifest.json").read_text())
        assert list(man["files"]) == ["a.csv", "sub/b.json"]
        assert man["files"]["a.csv"] == sha256_file(tmp_path / "a.csv")
        assert read_csv(tmp_path / "a.csv") == [{"x": "1.0000000000000000e+00"}]
