"""Deterministic CSV/JSON writers and the run manifest.

Floats are written as 17 significant digits in scientific notation; NaN and
infinities become the strings ``"nan"``, ``"inf"``, ``"-inf"`` in JSON and the
same bare tokens in CSV.  Every file goes through one :class:`RunWriter`, which
hashes it for the manifest.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import platform
from pathlib import Path

import numpy as np

from thinstrip import __version__


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".16e")


def _json_value(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt_float(obj)
        return s if s not in ("nan", "inf", "-inf") else json.dumps(s)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json_value(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_json_value(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj, indent: int = 1) -> str:
    return _json_value(obj, indent, 0) + "\n"


def _csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return "" if v is None else str(v)


def dumps_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class RunWriter:
    """Single writer for one run directory; records a hash of every file."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def _record(self, rel: str):
        self.files[rel] = sha256_file(self.root / rel)

    def text(self, rel: str, content: str) -> Path:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8", newline="\n")
        self._record(rel)
        return path

    def json(self, rel: str, obj) -> Path:
        return self.text(rel, dumps_json(obj))

    def csv(self, rel: str, rows: list[dict], columns: list[str] | None = None) -> Path:
        return self.text(rel, dumps_csv(rows, columns))

    def figure(self, rel: str, fig) -> Path:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, dpi=100, metadata={"Software": None})
        self._record(rel)
        return path

    def manifest(self, config: dict, timings: dict, extra: dict | None = None) -> Path:
        doc = {
            "code_version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "config": config,
            "timings_seconds": timings,
            "files": dict(sorted(self.files.items())),
        }
        if extra:
            doc.update(extra)
        path = self.root / "manifest.json"
        path.write_text(dumps_json(doc), encoding="utf-8", newline="\n")
        return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
