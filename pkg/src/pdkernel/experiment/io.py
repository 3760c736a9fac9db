"""File emission: atomic writes and the delimited time-series format."""

from __future__ import annotations

import os
import tempfile

import numpy as np

from ..errors import ConfigError
from ..solvers import TimeSeries


def atomic_write_text(path, text: str) -> None:
    """Whole-file atomic write: temp file in the target directory, then
    rename over the destination."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="ascii") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def probe_column(position: float) -> str:
    return f"u(x={position:.6g})"


def series_to_csv(series: TimeSeries) -> str:
    header = ",".join(["t"] + [probe_column(p) for p in series.probes])
    lines = [header]
    for ti, row in zip(series.t, series.values):
        lines.append(",".join(f"{v:.17g}" for v in [ti, *row]))
    return "\n".join(lines) + "\n"


def write_series_csv(series: TimeSeries, path) -> None:
    atomic_write_text(path, series_to_csv(series))


def read_series_csv(path, method: str = "unknown") -> TimeSeries:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ConfigError(f"empty series file {path}")
    header = lines[0].split(",")
    if header[0] != "t":
        raise ConfigError(f"series file {path} must start with a 't' column")
    probes = []
    for col in header[1:]:
        if not (col.startswith("u(x=") and col.endswith(")")):
            raise ConfigError(f"unrecognized series column {col!r} in {path}")
        probes.append(float(col[4:-1]))
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.size == 0:
        data = np.zeros((0, len(header)))
    return TimeSeries(t=data[:, 0], values=data[:, 1:], probes=tuple(probes),
                      method=method)


def table_to_csv(columns: dict[str, np.ndarray]) -> str:
    names = list(columns)
    rows = np.column_stack([np.asarray(columns[name], dtype=float)
                            for name in names])
    lines = [",".join(names)]
    for row in rows:
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def write_table_csv(columns: dict[str, np.ndarray], path) -> None:
    atomic_write_text(path, table_to_csv(columns))
