"""Readers for the toolkit's CSV contracts.

Deliberately independent of the simulation package: the CSV schema is
the only interface. Headers are matched exactly; a missing column is
reported by name.

Schemas:
    trajectory  time,sx,sy,sz
    distance    time,d,sigma
    sweep       alpha,omega_c,solver,n_value,n_intervals,horizon,converged,status
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["InputError", "read_trajectory", "read_distance", "read_sweep"]

TRAJECTORY_COLUMNS = ("time", "sx", "sy", "sz")
DISTANCE_COLUMNS = ("time", "d", "sigma")
SWEEP_COLUMNS = (
    "alpha", "omega_c", "solver", "n_value", "n_intervals", "horizon",
    "converged", "status",
)


class InputError(Exception):
    """Unreadable or schema-violating input file."""


def _parse_meta_value(s: str):
    if s == "none":
        return None
    if s in ("true", "false"):
        return s == "true"
    for caster in (int, float):
        try:
            return caster(s)
        except ValueError:
            pass
    return s


def _read_lines(path: str, expected: tuple[str, ...]):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    meta: dict = {}
    header = None
    rows: list[list[str]] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = _parse_meta_value(value.strip())
            continue
        if header is None:
            got = tuple(h.strip() for h in line.split(","))
            missing = [c for c in expected if c not in got]
            if missing:
                raise InputError(
                    f"{path}:{lineno}: missing column(s) "
                    + ", ".join(repr(c) for c in missing)
                )
            if got != expected:
                raise InputError(
                    f"{path}:{lineno}: header {','.join(got)!r} does not "
                    f"match the schema {','.join(expected)!r}"
                )
            header = got
            continue
        fields = line.split(",")
        if len(fields) != len(expected):
            raise InputError(
                f"{path}:{lineno}: expected {len(expected)} columns, "
                f"got {len(fields)}"
            )
        rows.append(fields)
    if header is None:
        raise InputError(f"{path}: missing header line")
    if not rows:
        raise InputError(f"{path}: no data rows")
    return meta, rows


def _float_column(path: str, rows, index: int, name: str) -> np.ndarray:
    out = np.empty(len(rows))
    for i, fields in enumerate(rows):
        text = fields[index]
        if text == "nan":
            out[i] = math.nan
            continue
        try:
            out[i] = float(text)
        except ValueError as exc:
            raise InputError(
                f"{path}: row {i + 1}: column {name!r} is not numeric: "
                f"{text!r}"
            ) from exc
    return out


def read_trajectory(path: str):
    """-> (meta, t, sx, sy, sz)."""
    meta, rows = _read_lines(path, TRAJECTORY_COLUMNS)
    cols = [
        _float_column(path, rows, i, name)
        for i, name in enumerate(TRAJECTORY_COLUMNS)
    ]
    return (meta, *cols)


def read_distance(path: str):
    """-> (meta, t, d, sigma)."""
    meta, rows = _read_lines(path, DISTANCE_COLUMNS)
    cols = [
        _float_column(path, rows, i, name)
        for i, name in enumerate(DISTANCE_COLUMNS)
    ]
    return (meta, *cols)


def read_sweep(path: str):
    """-> (meta, dict with alpha/omega_c/n_value arrays and solver/
    converged/status lists)."""
    meta, rows = _read_lines(path, SWEEP_COLUMNS)
    data = {
        "alpha": _float_column(path, rows, 0, "alpha"),
        "omega_c": _float_column(path, rows, 1, "omega_c"),
        "solver": [r[2] for r in rows],
        "n_value": _float_column(path, rows, 3, "n_value"),
        "n_intervals": _float_column(path, rows, 4, "n_intervals"),
        "horizon": _float_column(path, rows, 5, "horizon"),
        "converged": [r[6] == "true" for r in rows],
        "status": [r[7] for r in rows],
    }
    return meta, data
