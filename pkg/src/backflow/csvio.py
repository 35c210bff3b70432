"""Byte-deterministic CSV contracts shared by the CLI, tests and plots.

All floats are written in scientific notation with 9 significant
digits, `.` decimal separator and LF line endings; the header line is
mandatory. Metadata rides in leading `# key = value` comment lines
(solver, parameters, toolkit version; never timestamps), so identical
configurations produce byte-identical files.

Schemas:
    trajectory  time,sx,sy,sz
    distance    time,d,sigma
    sweep       alpha,omega_c,solver,n_value,n_intervals,horizon,converged,status
"""
from __future__ import annotations

import math

import numpy as np

from . import __version__
from .errors import SchemaError
from .measure import BlochTrajectory, TraceDistanceSeries

__all__ = [
    "format_float",
    "write_trajectory",
    "read_trajectory",
    "write_distance",
    "read_distance",
    "write_sweep",
    "TRAJECTORY_HEADER",
    "DISTANCE_HEADER",
    "SWEEP_HEADER",
]

TRAJECTORY_HEADER = "time,sx,sy,sz"
DISTANCE_HEADER = "time,d,sigma"
SWEEP_HEADER = "alpha,omega_c,solver,n_value,n_intervals,horizon,converged,status"


def format_float(x: float) -> str:
    """Canonical 9-significant-digit scientific form (-0.0 normalized)."""
    v = float(x)
    if v == 0.0:
        v = 0.0
    return f"{v:.8e}"


def _format_meta_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _parse_meta_value(s: str):
    if s == "none":
        return None
    if s == "true":
        return True
    if s == "false":
        return False
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _meta_lines(meta: dict) -> list[str]:
    lines = [f"# version = {__version__}"]
    for key in sorted(meta):
        if key == "version":
            continue
        lines.append(f"# {key} = {_format_meta_value(meta[key])}")
    return lines


def _read_csv(path: str, expected_header: str):
    """Returns (meta, list of row-field lists); validates the header."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            raw = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    meta: dict = {}
    header = None
    rows: list[list[str]] = []
    n_cols = len(expected_header.split(","))
    for lineno, line in enumerate(raw.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, val = body.partition("=")
                meta[key.strip()] = _parse_meta_value(val.strip())
            continue
        if header is None:
            header = line
            if header != expected_header:
                raise SchemaError(
                    f"{path}:{lineno}: header {header!r} does not match the "
                    f"expected schema {expected_header!r}"
                )
            continue
        fields = line.split(",")
        if len(fields) != n_cols:
            raise SchemaError(
                f"{path}:{lineno}: expected {n_cols} columns, got {len(fields)}"
            )
        rows.append(fields)
    if header is None:
        raise SchemaError(f"{path}: missing header line {expected_header!r}")
    return meta, rows


def _parse_columns(path: str, rows: list[list[str]], names: list[str]):
    cols = [np.empty(len(rows)) for _ in names]
    for i, fields in enumerate(rows):
        for j, name in enumerate(names):
            try:
                cols[j][i] = float(fields[j])
            except ValueError as exc:
                raise SchemaError(
                    f"{path}: row {i + 1}: column {name!r} is not numeric: "
                    f"{fields[j]!r}"
                ) from exc
    return cols


def write_trajectory(path: str, traj: BlochTrajectory) -> None:
    lines = _meta_lines(dict(traj.meta))
    lines.append(TRAJECTORY_HEADER)
    for k in range(len(traj.t)):
        lines.append(",".join((
            format_float(traj.t[k]), format_float(traj.sx[k]),
            format_float(traj.sy[k]), format_float(traj.sz[k]),
        )))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory(path: str) -> BlochTrajectory:
    meta, rows = _read_csv(path, TRAJECTORY_HEADER)
    if len(rows) < 2:
        raise SchemaError(f"{path}: trajectory needs at least 2 rows")
    t, sx, sy, sz = _parse_columns(path, rows, ["time", "sx", "sy", "sz"])
    return BlochTrajectory(t=t, sx=sx, sy=sy, sz=sz, meta=meta)


def write_distance(path: str, series: TraceDistanceSeries, meta: dict) -> None:
    lines = _meta_lines(meta)
    lines.append(DISTANCE_HEADER)
    for k in range(len(series.t)):
        lines.append(",".join((
            format_float(series.t[k]), format_float(series.d[k]),
            format_float(series.sigma[k]),
        )))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_distance(path: str) -> tuple[TraceDistanceSeries, dict]:
    meta, rows = _read_csv(path, DISTANCE_HEADER)
    if len(rows) < 2:
        raise SchemaError(f"{path}: distance series needs at least 2 rows")
    t, d, sigma = _parse_columns(path, rows, ["time", "d", "sigma"])
    return TraceDistanceSeries(t=t, d=d, sigma=sigma), meta


def write_sweep(path: str, rows: list[dict], meta: dict) -> None:
    """rows: dicts with keys alpha, omega_c, solver, n_value, n_intervals,
    horizon, converged, status (numeric fields may be nan on failure)."""
    lines = _meta_lines(meta)
    lines.append(SWEEP_HEADER)
    for r in rows:
        status = str(r["status"]).replace(",", ";").replace("\n", " ")
        n_int = r["n_intervals"]
        lines.append(",".join((
            format_float(r["alpha"]),
            format_float(r["omega_c"]),
            str(r["solver"]),
            format_float(r["n_value"]),
            "nan" if (isinstance(n_int, float) and math.isnan(n_int))
            else str(int(n_int)),
            format_float(r["horizon"]),
            "true" if r["converged"] else "false",
            status,
        )))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
