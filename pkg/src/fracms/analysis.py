"""Error norms, convergence orders and the on-disk artifact formats."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Trajectory",
    "RunReport",
    "ConvergenceFit",
    "error_norms",
    "convergence_order",
    "write_trajectory",
    "write_report",
    "write_table",
    "load_artifact",
]


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.times)


@dataclass
class RunReport:
    l1_error: float | None = None
    linf_error: float | None = None
    orders: tuple[float, float] | None = None
    wall_seconds: float = 0.0
    steps: int = 0
    shooting_iters: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("l1_error", "linf_error"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def _evaluate(reference, t):
    try:
        out = np.asarray(reference(t), dtype=float)
        if out.shape == t.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([reference(x) for x in t], dtype=float)


def error_norms(numeric: Trajectory, reference, l1: str = "mean") -> tuple[float, float]:
    """(L1, Linf) error of ``numeric`` against the function ``reference``.

    Linf is the largest pointwise error on the trajectory grid.  With
    ``l1="mean"`` the L1 error is the mean absolute error over the grid
    points; ``l1="integral"`` gives the trapezoidal integral of |e| in time
    instead.
    """
    if len(numeric) == 0:
        raise ValueError("empty trajectory")
    e = np.abs(numeric.values - _evaluate(reference, numeric.times))
    linf = float(e.max())
    if l1 == "mean":
        return float(e.mean()), linf
    if l1 == "integral":
        if len(e) == 1:
            return 0.0, linf
        return float(np.trapezoid(e, numeric.times)), linf
    raise ValueError(f"unknown L1 convention {l1!r}")


@dataclass(frozen=True)
class ConvergenceFit:
    pairwise: tuple[float, ...]
    slope: float


def convergence_order(errors) -> ConvergenceFit:
    """Observed orders from (h, e) pairs with strictly decreasing h.

    ``pairwise[k]`` is log(e_k/e_{k+1}) / log(h_k/h_{k+1}); ``slope`` is the
    least-squares slope of log e against log h.
    """
    pairs = [(float(h), float(e)) for h, e in errors]
    if len(pairs) < 2:
        raise ValueError("need at least two (h, error) pairs")
    h = np.array([p[0] for p in pairs])
    e = np.array([p[1] for p in pairs])
    if np.any(e <= 0) or np.any(h <= 0):
        raise ValueError("step sizes and errors must be positive")
    if not np.all(np.diff(h) < 0):
        raise ValueError("step sizes must be strictly decreasing")
    lh, le = np.log(h), np.log(e)
    pairwise = tuple(float(x) for x in np.diff(le) / np.diff(lh))
    slope = float(np.polyfit(lh, le, 1)[0])
    return ConvergenceFit(pairwise, slope)


# --- files ------------------------------------------------------------------
#
# CSV: a single "# key=value key=value ..." metadata line, a column header,
# then data rows.  JSON: {"meta": {...}, "columns": [...], "rows": [...]}.

def _fmt(x):
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _parse_scalar(text):
    if text in ("True", "False"):
        return text == "True"
    if text == "None":
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _write(path, meta: dict, columns: list, rows, fmt: str) -> Path:
    path = Path(path)
    for key, value in meta.items():
        if any(c.isspace() for c in _fmt(value)) or "=" in str(key):
            raise ValueError(f"metadata {key}={value!r} must not contain whitespace")
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# " + " ".join(f"{k}={_fmt(v)}" for k, v in meta.items()) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
        text = buf.getvalue()
    elif fmt == "json":
        def plain(x):
            if isinstance(x, (np.floating, float)):
                x = float(x)
                return x if math.isfinite(x) else repr(x)
            if isinstance(x, np.integer):
                return int(x)
            return x
        doc = {"meta": {k: plain(v) for k, v in meta.items()},
               "columns": list(columns),
               "rows": [[plain(x) for x in row] for row in rows]}
        text = json.dumps(doc, indent=1) + "\n"
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    _atomic_write(path, text)
    return path


def write_trajectory(path, traj: Trajectory, meta: dict, fmt: str = "csv") -> Path:
    return _write(path, meta, ["t", traj.label or "value"],
                  zip(traj.times, traj.values), fmt)


def write_report(path, report: RunReport, meta: dict, fmt: str = "csv") -> Path:
    rows = []
    for key, value in report.to_dict().items():
        if key == "extra":
            rows.extend((k, v) for k, v in value.items())
        elif key == "orders":
            if value is not None:
                rows.extend([("order_l1", value[0]), ("order_linf", value[1])])
        else:
            rows.append((key, value))
    return _write(path, meta, ["metric", "value"], rows, fmt)


def write_table(path, rows, meta: dict, fmt: str = "csv") -> Path:
    """Long-format table rows (param, metric, value, published_value, pass)."""
    return _write(path, meta, ["param", "metric", "value", "published_value", "pass"],
                  rows, fmt)


def load_artifact(path) -> tuple[dict, list, list]:
    """Read back any file written by this module as (meta, columns, rows)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        rows = [[_parse_scalar(x) if isinstance(x, str) else x for x in row]
                for row in doc["rows"]]
        return doc["meta"], doc["columns"], rows
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError(f"{path} has no metadata line")
    meta = {}
    for item in lines[0][2:].split():
        key, _, value = item.partition("=")
        meta[key] = _parse_scalar(value)
    reader = csv.reader(lines[1:])
    columns = next(reader)
    rows = [[_parse_scalar(x) for x in row] for row in reader]
    return meta, columns, rows
