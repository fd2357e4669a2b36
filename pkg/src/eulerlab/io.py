"""CSV and key = value serialization.  Floats are written with 17 significant digits."""

from __future__ import annotations

import csv
import math
import os

import numpy as np

SNAPSHOT_HEADER = ("t", "x", "tau", "u", "S", "eta", "c", "m", "r", "s", "y", "q")
PATH_HEADER = ("family", "t", "x", "c", "a0", "a2", "w", "w_field")
MONITOR_HEADER = (
    "t", "dt", "max_y", "max_q", "min_y", "min_q", "max_abs_w",
    "min_tau", "max_tau", "max_abs_s", "max_abs_r", "max_abs_u", "max_eta",
)


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.17g" % v
    if v is None:
        return "none"
    if isinstance(v, (tuple, list)):
        return ", ".join(fmt(x) for x in v)
    return str(v)


def _ensure_dir(path):
    d = os.path.dirname(os.fspath(path))
    if d:
        os.makedirs(d, exist_ok=True)


def write_rows(path, header, rows):
    _ensure_dir(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_table(path, header, columns):
    """Numeric columns to CSV (vectorized)."""
    _ensure_dir(path)
    arr = np.column_stack([np.asarray(c, dtype=float) for c in columns]) if len(columns[0]) else np.empty((0, len(header)))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, arr, fmt="%.17g", delimiter=",")


def write_snapshots(path, snapshots):
    """All snapshots stacked in one CSV, time-ordered."""
    cols = [np.concatenate([s.columns()[k] for s in snapshots]) for k in SNAPSHOT_HEADER]
    write_table(path, SNAPSHOT_HEADER, cols)


def write_monitors(path, monitors):
    write_table(path, MONITOR_HEADER, [monitors[k] for k in MONITOR_HEADER])


def write_paths(path, paths, series):
    """``series[i]`` is the Riccati-integrated ``w`` for ``paths[i]`` (NaN after a flag)."""
    _ensure_dir(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(PATH_HEADER) + "\n")
        for p, ser in zip(paths, series):
            w = np.full(len(p), np.nan)
            w[: len(ser.w)] = ser.w
            arr = np.column_stack([p["t"], p["x"], p["c"], p["a0"], p["a2"], w, p["w"]])
            np.savetxt(fh, arr, fmt=p.family + "," + ",".join(["%.17g"] * 7))


def write_kv(path, mapping: dict):
    _ensure_dir(path)
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in mapping.items():
            fh.write(f"{k} = {fmt(v)}\n")


def read_kv(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


def read_table(path, time=None):
    """Columns of one snapshot from a snapshot CSV (default: the earliest time)."""
    try:
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=float, encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read table {path}: {exc}") from None
    data = np.atleast_1d(data)
    names = data.dtype.names or ()
    for col in ("x", "tau", "u"):
        if col not in names:
            raise ValueError(f"table {path} lacks column {col!r}")
    if "t" in names:
        times = data["t"]
        t0 = float(np.min(times)) if time is None else float(time)
        sel = times == t0
        if not np.any(sel):
            raise ValueError(f"table {path} has no rows at t = {t0!r}")
        data = data[sel]
    return {k: np.asarray(data[k]) for k in names}
