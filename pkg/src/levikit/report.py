"""
Scenario reports: scalar and verdict ledgers, artifacts, and their files.

A report directory holds

``report.csv``
    one row per scalar or verdict, columns ``CSV_COLUMNS``;
``grids/*.grid``, ``masks/*.pbm``, ``tables/*.csv``
    field dumps, Reinhardt masks and auxiliary tables;
``report.json``
    provenance, the verdict ledger, witnesses and the SHA-256 of every
    other file, which ``verify_report`` re-checks.

Everything written is a deterministic function of the report contents, so
identical runs give byte-identical directories.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import ScalarGrid, dump_grid, _fmt

CSV_COLUMNS = ["kind", "name", "value", "status", "threshold", "tolerance", "budget", "seed"]
FORMATS = ("csv", "json", "grids")


@dataclass
class Report:
    """In-memory scenario report; nothing touches the disk until ``emit_report``."""

    scenario: str
    provenance: dict = field(default_factory=dict)
    scalars: list = field(default_factory=list)       # (name, value)
    verdicts: list = field(default_factory=list)      # dicts with CSV_COLUMNS keys
    grids: dict = field(default_factory=dict)
    masks: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)

    @property
    def seed(self):
        return self.provenance.get("seed", "")

    def scalar(self, name: str, value):
        self.scalars.append((name, value))

    def check(self, name: str, ok: bool, value=None, threshold=None,
              tolerance=None, budget=None) -> bool:
        """Record a verdict row; returns ``ok`` so callers can chain."""
        self.verdicts.append({"kind": "verdict", "name": name,
                              "value": "" if value is None else value,
                              "status": "pass" if ok else "fail",
                              "threshold": "" if threshold is None else threshold,
                              "tolerance": "" if tolerance is None else tolerance,
                              "budget": "" if budget is None else budget,
                              "seed": self.seed})
        return bool(ok)

    @property
    def passed(self) -> bool:
        return all(v["status"] == "pass" for v in self.verdicts)

    @property
    def failures(self) -> list:
        return [v["name"] for v in self.verdicts if v["status"] != "pass"]


def _plain(x):
    """JSON-ready copy with numpy scalars and arrays converted."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def report_csv(r: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for name, value in r.scalars:
        w.writerow(["scalar", name, _fmt(value), "", "", "", "", ""])
    for v in r.verdicts:
        w.writerow([_fmt(v[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def emit_report(r: Report, out, formats=FORMATS) -> list:
    """
    Write the report files into ``out`` (created if needed).

    Returns the written paths relative to ``out``.  ``OSError`` propagates
    for unwritable locations.
    """
    bad = set(formats) - set(FORMATS)
    if bad:
        raise ValueError(f"unknown report formats {sorted(bad)}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(rel: str, data):
        p = out / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, ScalarGrid):
            dump_grid(data, p)
        elif isinstance(data, bytes):
            p.write_bytes(data)
        else:
            p.write_text(data)
        written.append(rel)

    if "csv" in formats:
        put("report.csv", report_csv(r))
    if "grids" in formats:
        for name in sorted(r.grids):
            put(f"grids/{name}.grid", r.grids[name])
        for name in sorted(r.masks):
            put(f"masks/{name}.pbm", r.masks[name].to_pbm())
        for name in sorted(r.tables):
            put(f"tables/{name}.csv", r.tables[name])
    if "json" in formats:
        doc = {"scenario": r.scenario, "provenance": r.provenance,
               "passed": r.passed, "verdicts": r.verdicts,
               "scalars": [{"name": n, "value": v} for n, v in r.scalars],
               "witnesses": r.witnesses,
               "artifacts": {rel: sha256(out / rel) for rel in written}}
        put("report.json", dumps(doc))
    return written


def verify_report(directory) -> tuple:
    """
    Re-check a report directory.

    Returns ``(code, messages)``: 0 when every hash matches and every
    verdict passes, 2 when the files are intact but some verdict failed,
    1 when the ledger is missing, unreadable or does not match the files.
    """
    d = Path(directory)
    msgs = []
    try:
        doc = json.loads((d / "report.json").read_text())
    except (OSError, ValueError) as exc:
        return 1, [f"cannot read report.json: {exc}"]
    ok = True
    for rel, digest in sorted(doc.get("artifacts", {}).items()):
        p = d / rel
        if not p.is_file():
            ok = False
            msgs.append(f"missing {rel}")
        elif sha256(p) != digest:
            ok = False
            msgs.append(f"hash mismatch {rel}")
    verdicts = doc.get("verdicts", [])
    if "report.csv" in doc.get("artifacts", {}) and (d / "report.csv").is_file():
        rows = list(csv.DictReader(io.StringIO((d / "report.csv").read_text())))
        ledger = [(row["name"], row["status"]) for row in rows if row["kind"] == "verdict"]
        if ledger != [(v["name"], v["status"]) for v in verdicts]:
            ok = False
            msgs.append("verdict ledger in report.csv disagrees with report.json")
    failed = [v["name"] for v in verdicts if v["status"] != "pass"]
    if bool(doc.get("passed")) == bool(failed):
        ok = False
        msgs.append("summary flag disagrees with the verdict ledger")
    if not ok:
        return 1, msgs
    if failed:
        msgs += [f"verdict failed: {n}" for n in failed]
        return 2, msgs
    msgs.append(f"{len(verdicts)} verdicts pass, {len(doc.get('artifacts', {}))} files intact")
    return 0, msgs


def load_report(directory) -> Optional[dict]:
    p = Path(directory) / "report.json"
    return json.loads(p.read_text()) if p.is_file() else None
