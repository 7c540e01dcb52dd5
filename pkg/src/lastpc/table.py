"""The n-cases by p-variables input table."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True, eq=False)
class DataTable:
    """Numeric cases-by-variables table.

    ``unit_scale[j]`` multiplies column ``j`` into SI units, so a column
    stored as "x 1e10 m" carries scale ``1e10``.
    """

    variable_names: tuple[str, ...]
    values: np.ndarray
    unit_scale: np.ndarray = field(default=None)
    case_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise InputError(f"values must be 2-D, got shape {values.shape}")
        names = tuple(str(v) for v in self.variable_names)
        if len(names) != values.shape[1]:
            raise InputError(
                f"{len(names)} variable names for {values.shape[1]} columns")
        if len(set(names)) != len(names):
            raise InputError(f"duplicate variable names in {names}")
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise InputError(f"non-finite value at case {i}, variable {names[j]!r}")
        if self.unit_scale is None:
            scale = np.ones(values.shape[1])
        else:
            scale = np.array(self.unit_scale, dtype=float).reshape(-1)
        if scale.shape != (values.shape[1],):
            raise InputError("unit_scale length must equal the number of variables")
        if not np.all(np.isfinite(scale) & (scale > 0)):
            raise InputError("unit_scale entries must be finite and > 0")
        labels = self.case_labels
        if labels is not None:
            labels = tuple(str(c) for c in labels)
            if len(labels) != values.shape[0]:
                raise InputError("case_labels length must equal the number of cases")
        values.setflags(write=False)
        scale.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "variable_names", names)
        object.__setattr__(self, "unit_scale", scale)
        object.__setattr__(self, "case_labels", labels)

    @property
    def n_cases(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index(name)]

    def index(self, name: str) -> int:
        try:
            return self.variable_names.index(name)
        except ValueError:
            raise InputError(f"unknown variable {name!r}") from None

    def select(self, columns) -> DataTable:
        """Sub-table with the given column indices, in that order."""
        columns = list(columns)
        return DataTable(
            tuple(self.variable_names[j] for j in columns),
            self.values[:, columns],
            self.unit_scale[columns],
            self.case_labels,
        )
