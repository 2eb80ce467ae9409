"""Campaign reports: per-case records, summaries and table emission."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable

import numpy as np

from . import __version__

CSV_COLUMNS = ("case_id", "d", "alpha", "value_closed_form", "value_direct", "residual", "pass")


def toolkit_version() -> str:
    return __version__


@dataclass
class CaseRecord:
    """One checked case.

    ``value_closed_form`` and ``value_direct`` are the two sides being
    compared (reference and computed); ``extra`` goes to JSON only.
    """

    case_id: int
    d: int
    value_closed_form: float
    value_direct: float
    residual: float
    passed: bool
    alpha: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "case_id": self.case_id,
            "d": self.d,
            "alpha": self.alpha,
            "value_closed_form": self.value_closed_form,
            "value_direct": self.value_direct,
            "residual": self.residual,
            "pass": self.passed,
        }
        if self.extra:
            out["extra"] = self.extra
        return out


@dataclass
class ScenarioReport:
    command: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    cases: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    wall_time: float | None = None
    version: str = field(default_factory=toolkit_version)

    def add(self, record: CaseRecord) -> CaseRecord:
        self.cases.append(record)
        return record

    @property
    def failures(self) -> list:
        return [c for c in self.cases if not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        finite = [c.residual for c in self.cases if math.isfinite(c.residual)]
        return {
            "cases": len(self.cases),
            "passed": len(self.cases) - len(self.failures),
            "failed": len(self.failures),
            "max_residual": max(finite) if finite else 0.0,
            "wall_time": self.wall_time,
        }

    def summary_line(self) -> str:
        s = self.summary()
        return f"{self.command}: {s['passed']}/{s['cases']} passed, max residual {s['max_residual']:.3e}"

    def by_check(self) -> dict:
        """Pass/fail counts grouped by ``extra['check']``."""
        groups: dict = {}
        for c in self.cases:
            key = c.extra.get("check", self.command)
            g = groups.setdefault(key, {"cases": 0, "failed": 0})
            g["cases"] += 1
            g["failed"] += not c.passed
        return groups

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "summary": self.summary(),
            "notes": self.notes,
            "cases": [c.as_dict() for c in self.cases],
        }

    def to_json(self) -> bytes:
        return (json.dumps(_plain(self.to_dict()), indent=2, sort_keys=True) + "\n").encode()

    def to_csv(self) -> bytes:
        # no wall time here: the table is byte-stable for a fixed seed
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in self.cases:
            w.writerow([c.case_id, c.d, "" if c.alpha is None else repr(float(c.alpha)),
                        _num(c.value_closed_form), _num(c.value_direct), _num(c.residual),
                        "true" if c.passed else "false"])
        return buf.getvalue().encode()

    def emit(self, fmt: str = "json") -> bytes:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}")

    def write(self, path, fmt: str | None = None) -> Path:
        path = Path(path)
        fmt = fmt or ("csv" if path.suffix == ".csv" else "json")
        atomic_write(path, self.emit(fmt))
        return path


def emit_table(report: ScenarioReport, fmt: str = "json") -> bytes:
    return report.emit(fmt)


def _num(x) -> str:
    x = float(x)
    return repr(x) if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")


def _plain(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, complex arrays to re/im, inf to strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": _plain(obj.real.tolist()), "im": _plain(obj.imag.tolist())}
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else _num(x)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def atomic_write(path, data: bytes) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def worker_count(default: int = 1) -> int:
    raw = os.environ.get("RESQ_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def parallel_map(fn: Callable, items: Iterable, workers: int | None = None) -> list:
    """Ordered map, threaded when ``workers > 1``."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
