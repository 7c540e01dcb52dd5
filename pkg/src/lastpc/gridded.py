"""Gridded multi-field time series: stacking, filtering, cropping, file I/O.

A stack holds ``values[time, field, lat, lon]``. Latitude row ``i`` sits at
``lat0 + i * dlat`` (``dlat < 0`` for north-to-south grids), longitude
column ``j`` at ``lon0 + j * dlon``. Flattening is field-major, then
latitude rows, longitude fastest::

    column = field_index * (nlat * nlon) + lat_index * nlon + lon_index
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .discovery import SegmentSpec
from .errors import InputError
from .table import DataTable

FLATTENING_ORDER = "field-major; latitude rows from lat0; longitude fastest"


@dataclass(frozen=True)
class FieldInfo:
    name: str
    units: str = ""


@dataclass(frozen=True, eq=False)
class GriddedStack:
    fields: tuple[FieldInfo, ...]
    values: np.ndarray
    lat0: float = 0.0
    dlat: float = 1.0
    lon0: float = 0.0
    dlon: float = 1.0
    time_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        fields = tuple(f if isinstance(f, FieldInfo) else FieldInfo(*f)
                       if isinstance(f, (tuple, list)) else FieldInfo(str(f))
                       for f in self.fields)
        values = np.array(self.values, dtype=float)
        if values.ndim != 4:
            raise InputError(f"values must be (time, field, lat, lon), got shape {values.shape}")
        if values.shape[1] != len(fields):
            raise InputError(f"{len(fields)} field descriptors for {values.shape[1]} fields")
        if min(values.shape) < 1:
            raise InputError(f"empty stack dimension in shape {values.shape}")
        if len({f.name for f in fields}) != len(fields):
            raise InputError("duplicate field names")
        if not np.all(np.isfinite(values)):
            raise InputError("stack values must be finite")
        if self.time_labels is not None and len(self.time_labels) != values.shape[0]:
            raise InputError("time_labels length must equal n_time")
        values.setflags(write=False)
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "values", values)
        if self.time_labels is not None:
            object.__setattr__(self, "time_labels", tuple(self.time_labels))

    @property
    def n_time(self) -> int:
        return self.values.shape[0]

    @property
    def nlat(self) -> int:
        return self.values.shape[2]

    @property
    def nlon(self) -> int:
        return self.values.shape[3]

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    @property
    def latitudes(self) -> np.ndarray:
        return self.lat0 + self.dlat * np.arange(self.nlat)

    @property
    def longitudes(self) -> np.ndarray:
        return self.lon0 + self.dlon * np.arange(self.nlon)

    def field(self, name: str) -> np.ndarray:
        """(time, lat, lon) array of one field."""
        names = self.field_names
        if name not in names:
            raise InputError(f"unknown field {name!r}; have {list(names)}")
        return self.values[:, names.index(name)]

    def with_values(self, values, **changes) -> GriddedStack:
        return replace(self, values=values, **changes)


def flatten_stack(stack: GriddedStack) -> tuple[DataTable, SegmentSpec]:
    """One row per time step, one column per (field, lat, lon)."""
    n_time, n_fields, nlat, nlon = stack.values.shape
    data = stack.values.reshape(n_time, n_fields * nlat * nlon)
    names = tuple(f"{f.name}[{i},{j}]"
                  for f in stack.fields for i in range(nlat) for j in range(nlon))
    block = nlat * nlon
    segments = SegmentSpec(
        stack.field_names,
        tuple((k * block, (k + 1) * block) for k in range(n_fields)),
        grid=(nlat, nlon))
    return DataTable(names, data, None, stack.time_labels), segments


def unflatten(table: DataTable, like: GriddedStack) -> GriddedStack:
    """Inverse of ``flatten_stack`` using ``like`` for grid metadata."""
    shape = (table.n_cases, len(like.fields), like.nlat, like.nlon)
    if table.n_vars != shape[1] * shape[2] * shape[3]:
        raise InputError("table width does not match the stack layout")
    return like.with_values(table.values.reshape(shape), time_labels=table.case_labels)


def difference_filter(stack: GriddedStack, lag: int = 12) -> GriddedStack:
    """out[t] = in[t] - in[t - lag]; drops the first ``lag`` steps."""
    lag = int(lag)
    if lag < 1:
        raise InputError("lag must be a positive integer")
    if stack.n_time <= lag:
        raise InputError(f"need more than {lag} time steps, have {stack.n_time}")
    out = stack.values[lag:] - stack.values[:-lag]
    labels = stack.time_labels[lag:] if stack.time_labels is not None else None
    return stack.with_values(out, time_labels=labels)


def crop_latitudes(stack: GriddedStack, lat_min: float, lat_max: float) -> GriddedStack:
    """Keep latitude rows with lat_min <= lat <= lat_max (inclusive)."""
    if lat_min > lat_max:
        lat_min, lat_max = lat_max, lat_min
    lats = stack.latitudes
    slack = 1e-9 * max(abs(stack.dlat), 1.0)
    rows = np.flatnonzero((lats >= lat_min - slack) & (lats <= lat_max + slack))
    if rows.size == 0:
        raise InputError(
            f"latitude range [{lat_min}, {lat_max}] misses the grid "
            f"({lats.min()}..{lats.max()})")
    return stack.with_values(stack.values[:, :, rows[0]:rows[-1] + 1],
                             lat0=float(lats[rows[0]]))


def virtual_temperature(T, q):
    """T_v = T (1 + q/0.622) / (1 + q), T in kelvin, q specific humidity (kg/kg)."""
    T = np.asarray(T, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(~(T > 0)):
        raise InputError("temperature must be positive kelvin")
    if np.any(~(q >= 0)):
        raise InputError("specific humidity must be nonnegative")
    return T * (1.0 + q / 0.622) / (1.0 + q)


# --- directory format ----------------------------------------------------

def write_stack(stack: GriddedStack, directory) -> Path:
    """Write ``meta.json`` plus one headerless ``<field>.csv`` per field."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    meta = {
        "fields": [{"name": f.name, "units": f.units} for f in stack.fields],
        "nlat": stack.nlat,
        "nlon": stack.nlon,
        "lat0": stack.lat0,
        "dlat": stack.dlat,
        "lon0": stack.lon0,
        "dlon": stack.dlon,
        "n_time": stack.n_time,
        "flattening_order": FLATTENING_ORDER,
    }
    if stack.time_labels is not None:
        meta["time_labels"] = list(stack.time_labels)
    with open(path / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    for k, f in enumerate(stack.fields):
        block = stack.values[:, k].reshape(stack.n_time, -1)
        with open(path / f"{f.name}.csv", "w") as fh:
            for row in block:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
    return path


def read_stack(directory) -> GriddedStack:
    path = Path(directory)
    meta_path = path / "meta.json"
    if not meta_path.is_file():
        raise InputError(f"{meta_path}: missing stack metadata")
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
        nlat, nlon, n_time = int(meta["nlat"]), int(meta["nlon"]), int(meta["n_time"])
        fields = tuple(FieldInfo(str(f["name"]), str(f.get("units", "")))
                       for f in meta["fields"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{meta_path}: invalid metadata ({exc})") from None
    order = meta.get("flattening_order", FLATTENING_ORDER)
    if order != FLATTENING_ORDER:
        raise InputError(f"{meta_path}: unsupported flattening order {order!r}")
    blocks = []
    for f in fields:
        blocks.append(_read_field_csv(path / f"{f.name}.csv", n_time, nlat * nlon))
    values = np.stack(blocks, axis=1).reshape(n_time, len(fields), nlat, nlon)
    return GriddedStack(fields, values,
                        float(meta.get("lat0", 0.0)), float(meta.get("dlat", 1.0)),
                        float(meta.get("lon0", 0.0)), float(meta.get("dlon", 1.0)),
                        meta.get("time_labels"))


def _read_field_csv(path, n_rows, n_cols):
    if not os.path.isfile(path):
        raise InputError(f"{path}: missing field file")
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != n_cols:
                raise InputError(f"{path}:{lineno}: expected {n_cols} values, got {len(parts)}")
            try:
                rows.append([float(x) for x in parts])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    if len(rows) != n_rows:
        raise InputError(f"{path}: expected {n_rows} rows, got {len(rows)}")
    return np.array(rows)
