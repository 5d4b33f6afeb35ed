"""
Plain-text file formats
=======================

All data files are whitespace-separated columns preceded by ``#`` header
lines of the form ``# key: value``. The last header line is always
``# columns: <name> <name> ...`` and names the columns in order. A header
line with key ``created`` carries a wall-clock timestamp; it is the only
line that differs between reruns of the same configuration.

trace      columns ``t re im``: one complex field envelope
correlation columns ``tau mean stderr analytic z``
sweep data columns ``sweep_value mc_mean mc_stderr analytic z``

Summaries are JSON objects, one key per line.
"""

from __future__ import annotations

import datetime as _dt
import json
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from . import __version__

__all__ = [
    "write_columns",
    "read_columns",
    "write_trace",
    "read_trace",
    "write_correlation",
    "write_json_summary",
    "strip_timestamp",
]

TIMESTAMP_KEY = "created"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def write_columns(
    path,
    columns: Sequence[str],
    data: Iterable[Sequence[float]],
    header: Optional[Dict[str, object]] = None,
    kind: str = "data",
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# fourthorder {kind}", f"# version: {__version__}"]
    for key, value in (header or {}).items():
        lines.append(f"# {key}: {value}")
    lines.append(f"# {TIMESTAMP_KEY}: {_timestamp()}")
    lines.append("# columns: " + " ".join(columns))
    for row in data:
        lines.append(" ".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_columns(path) -> Tuple[Dict[str, str], np.ndarray]:
    """Parse a file written by :func:`write_columns` into ``(header, data)``.

    ``data`` is a structured-free 2-D float array with one column per name in
    ``header['columns']`` (shape ``(0, ncols)`` when there are no rows).
    """
    header: Dict[str, str] = {}
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                header[key.strip()] = value.strip()
            continue
        if line.strip():
            rows.append([float(v) for v in line.split()])
    ncols = len(header.get("columns", "").split())
    data = np.array(rows, dtype=float).reshape(-1, ncols) if ncols else np.array(rows, dtype=float)
    return header, data


def write_trace(path, trace, note: str = "") -> Path:
    """Export a :class:`~fourthorder.fields.FieldTrace` as ``t re im`` columns."""
    header = {"dt": _fmt(trace.dt), "carrier": _fmt(trace.carrier), "t0": _fmt(trace.t0)}
    if note:
        header["note"] = note
    data = np.column_stack([trace.times, trace.samples.real, trace.samples.imag])
    return write_columns(path, ("t", "re", "im"), data, header, kind="trace")


def read_trace(path):
    from .fields import FieldTrace

    header, data = read_columns(path)
    return FieldTrace(
        data[:, 1] + 1j * data[:, 2],
        float(header["dt"]),
        carrier=float(header.get("carrier", 0.0)),
        t0=float(header.get("t0", 0.0)),
    )


def write_correlation(path, estimate, analytic=None, header: Optional[Dict[str, object]] = None) -> Path:
    """Export a :class:`~fourthorder.detection.CorrelationEstimate` with its analytic curve."""
    from .detection import zscore

    analytic = np.full_like(estimate.mean, np.nan) if analytic is None else np.asarray(analytic, float)
    z = zscore(estimate.mean, estimate.stderr, analytic)
    meta = {"n_realizations": estimate.n_realizations, "n_time_samples": estimate.n_time_samples}
    meta.update(header or {})
    data = np.column_stack([estimate.tau_grid, estimate.mean, estimate.stderr, analytic, z])
    return write_columns(path, ("tau", "mean", "stderr", "analytic", "z"), data, meta, kind="correlation")


def write_json_summary(path, payload: Dict[str, object]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"format": "fourthorder-summary-1", "version": __version__}
    body.update(payload)
    body[TIMESTAMP_KEY] = _timestamp()
    path.write_text(json.dumps(body, indent=2) + "\n", encoding="utf-8")
    return path


def strip_timestamp(text: str) -> str:
    """Drop the timestamp line so reruns can be compared byte for byte."""
    keep = []
    for line in text.splitlines(keepends=True):
        s = line.strip()
        if s.startswith(f"# {TIMESTAMP_KEY}:") or s.startswith(f'"{TIMESTAMP_KEY}":'):
            continue
        keep.append(line)
    return "".join(keep)
