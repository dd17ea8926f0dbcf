"""
Core types for gridded panel data and grid geometry.

A ``GridPanel`` stores one record per ``(row, col, period)``. Rows grow
southward and columns grow eastward, so a shift "from the north west to the
south east" is a positive offset on both indices. Missing values are NaN
(``MISSING``); binary variables are stored as floats in {0, 1, NaN}.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from gridrobust.errors import ConfigurationError, InvalidArgumentError, ValidationError

MISSING = float("nan")


def is_missing(value) -> bool:
    return value is None or (isinstance(value, float) and math.isnan(value))


class Role(str, enum.Enum):
    OUTCOME_BINARY = "outcome_binary"
    TREATMENT_BINARY = "treatment_binary"
    CELL_BINARY = "cell_binary"
    CELL_CONTINUOUS = "cell_continuous"
    COUNTRY_CONTINUOUS = "country_continuous"

    @property
    def is_binary(self) -> bool:
        return self in BINARY_ROLES

    @classmethod
    def parse(cls, text: str) -> "Role":
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            allowed = ", ".join(r.value for r in cls)
            raise ConfigurationError(f"unknown role {text!r}; expected one of {allowed}") from None


BINARY_ROLES = frozenset({Role.OUTCOME_BINARY, Role.TREATMENT_BINARY, Role.CELL_BINARY})


class CellKey(NamedTuple):
    row: int
    col: int
    period: int


@dataclass(frozen=True)
class VariableSpec:
    name: str
    role: Role

    def __post_init__(self):
        if not self.name:
            raise ConfigurationError("variable name must be non-empty")
        object.__setattr__(self, "role", Role(self.role))


@dataclass(frozen=True)
class AggregationSpec:
    """One grid-cell specification: block side ``multiplier`` and origin ``shift``.

    ``col_shift`` enables independent row/column shifts; when ``None`` the
    shift is diagonal (the same offset on rows and columns).
    """

    multiplier: int
    shift: int = 0
    col_shift: int | None = None

    def __post_init__(self):
        k = self.multiplier
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
            raise InvalidArgumentError(f"multiplier must be an integer >= 1, got {k!r}")
        for name in ("shift", "col_shift"):
            s = getattr(self, name)
            if s is None and name == "col_shift":
                continue
            if isinstance(s, bool) or not isinstance(s, (int, np.integer)) or not 0 <= s < k:
                raise InvalidArgumentError(f"{name} must satisfy 0 <= {name} < {k}, got {s!r}")

    @property
    def row_shift(self) -> int:
        return self.shift

    @property
    def column_shift(self) -> int:
        return self.shift if self.col_shift is None else self.col_shift


def _check_geometry(base_side_km, k):
    if not isinstance(base_side_km, (int, float, np.floating, np.integer)) or not base_side_km > 0:
        raise InvalidArgumentError(f"base_side_km must be positive, got {base_side_km!r}")
    if not math.isfinite(base_side_km):
        raise InvalidArgumentError("base_side_km must be finite")
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidArgumentError(f"k must be an integer >= 1, got {k!r}")


def aggregated_area_km2(base_side_km: float, k: int) -> float:
    """Area of a k x k block of square cells with side ``base_side_km``."""
    _check_geometry(base_side_km, k)
    return (base_side_km * k) ** 2


def block_diagonal_km(base_side_km: float, k: int) -> float:
    """Longest straight line inside a k x k block."""
    _check_geometry(base_side_km, k)
    return base_side_km * k * math.sqrt(2.0)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


class GridPanel:
    """Immutable panel of grid-cell observations.

    Records are kept in canonical ``(row, col, period)`` order regardless of
    the order they were supplied in.

    Parameters
    ----------
    rows, cols, periods : array-like of int
        Cell keys, one entry per record.
    values : array-like of float, shape (n_records, n_variables)
        Variable values, NaN for missing.
    variables : sequence of VariableSpec
    base_side_km : float
        Side length of one cell in km.
    """

    __slots__ = ("_rows", "_cols", "_periods", "_values", "_variables", "_base_side_km", "_index")

    def __init__(self, rows, cols, periods, values, variables: Sequence[VariableSpec], base_side_km: float):
        rows = np.asarray(rows, dtype=np.int64).reshape(-1)
        cols = np.asarray(cols, dtype=np.int64).reshape(-1)
        periods = np.asarray(periods, dtype=np.int64).reshape(-1)
        variables = tuple(variables)
        n = rows.shape[0]
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            values = values.reshape(n, len(variables))
        if cols.shape[0] != n or periods.shape[0] != n or values.shape != (n, len(variables)):
            raise InvalidArgumentError(
                f"inconsistent shapes: {n} rows, {cols.shape[0]} cols, {periods.shape[0]} periods, "
                f"values {values.shape} for {len(variables)} variables"
            )
        if n and (rows.min() < 0 or cols.min() < 0):
            raise InvalidArgumentError("row and col indices must be >= 0")
        if not base_side_km > 0 or not math.isfinite(base_side_km):
            raise InvalidArgumentError(f"base_side_km must be positive, got {base_side_km!r}")

        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate variable names in {names}")
        for role in (Role.OUTCOME_BINARY, Role.TREATMENT_BINARY):
            count = sum(v.role is role for v in variables)
            if count != 1:
                raise ConfigurationError(f"exactly one {role.value} variable required, found {count}")

        for j, var in enumerate(variables):
            col = values[:, j]
            if var.role.is_binary:
                bad = ~(np.isnan(col) | (col == 0.0) | (col == 1.0))
                if bad.any():
                    i = int(np.flatnonzero(bad)[0])
                    raise ValidationError(
                        f"binary variable {var.name!r} has value {col[i]!r} outside {{0, 1, missing}}",
                        column=var.name,
                    )
            elif np.isinf(col).any():
                raise ValidationError(f"variable {var.name!r} has infinite values", column=var.name)

        order = np.lexsort((periods, cols, rows))
        rows, cols, periods, values = rows[order], cols[order], periods[order], values[order]
        if n > 1:
            dup = (np.diff(rows) == 0) & (np.diff(cols) == 0) & (np.diff(periods) == 0)
            if dup.any():
                i = int(np.flatnonzero(dup)[0])
                raise ValidationError(f"duplicate cell key {CellKey(int(rows[i]), int(cols[i]), int(periods[i]))}")

        self._rows = _readonly(rows)
        self._cols = _readonly(cols)
        self._periods = _readonly(periods)
        self._values = _readonly(values)
        self._variables = variables
        self._base_side_km = float(base_side_km)
        self._index = {v.name: j for j, v in enumerate(variables)}

    @classmethod
    def from_records(
        cls,
        records: Mapping[CellKey, Mapping[str, float]] | Iterable[tuple[tuple[int, int, int], Mapping[str, float]]],
        variables: Sequence[VariableSpec],
        base_side_km: float,
    ) -> "GridPanel":
        """Build a panel from ``{(row, col, period): {name: value}}`` records.

        Absent names and ``None`` become missing.
        """
        items = list(records.items() if isinstance(records, Mapping) else records)
        variables = tuple(variables)
        keys = np.array([tuple(k) for k, _ in items], dtype=np.int64).reshape(-1, 3)
        values = np.array(
            [[MISSING if is_missing(rec.get(v.name)) else float(rec[v.name]) for v in variables] for _, rec in items],
            dtype=np.float64,
        ).reshape(len(items), len(variables))
        if len(items) != len({tuple(k) for k, _ in items}):
            raise ValidationError("duplicate cell key among records")
        return cls(keys[:, 0], keys[:, 1], keys[:, 2], values, variables, base_side_km)

    rows = property(lambda self: self._rows)
    cols = property(lambda self: self._cols)
    periods = property(lambda self: self._periods)
    values = property(lambda self: self._values)
    variables = property(lambda self: self._variables)
    base_side_km = property(lambda self: self._base_side_km)

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self._variables)

    @property
    def outcome(self) -> VariableSpec:
        return next(v for v in self._variables if v.role is Role.OUTCOME_BINARY)

    @property
    def treatment(self) -> VariableSpec:
        return next(v for v in self._variables if v.role is Role.TREATMENT_BINARY)

    @property
    def n_records(self) -> int:
        return int(self._rows.shape[0])

    def __len__(self) -> int:
        return self.n_records

    def keys(self) -> list[CellKey]:
        return [CellKey(int(r), int(c), int(p)) for r, c, p in zip(self._rows, self._cols, self._periods)]

    @property
    def cells(self) -> dict[CellKey, dict[str, float]]:
        names = self.variable_names
        return {
            key: dict(zip(names, (float(x) for x in vals)))
            for key, vals in zip(self.keys(), self._values)
        }

    def has_variable(self, name: str) -> bool:
        return name in self._index

    def variable(self, name: str) -> VariableSpec:
        return self._variables[self._column_index(name)]

    def _column_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ConfigurationError(f"unknown variable {name!r}; panel has {list(self._index)}") from None

    def column(self, name: str) -> np.ndarray:
        return self._values[:, self._column_index(name)]

    def take(self, indices) -> "GridPanel":
        """Sub-panel of the records at ``indices`` (positions in canonical order)."""
        idx = np.asarray(indices, dtype=np.int64)
        return GridPanel(
            self._rows[idx], self._cols[idx], self._periods[idx], self._values[idx],
            self._variables, self._base_side_km,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridPanel):
            return NotImplemented
        return (
            self._variables == other._variables
            and self._base_side_km == other._base_side_km
            and np.array_equal(self._rows, other._rows)
            and np.array_equal(self._cols, other._cols)
            and np.array_equal(self._periods, other._periods)
            and np.array_equal(self._values, other._values, equal_nan=True)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"GridPanel(n_records={self.n_records}, variables={list(self.variable_names)}, "
            f"base_side_km={self._base_side_km})"
        )
