"""
Block aggregation of grid panels.

Cells are grouped into k x k blocks whose origin is offset by ``shift``
cells toward the south east. Blocks cut by the map edge (or by the shift at
the north-west corner) are kept as smaller blocks.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from gridrobust.errors import InvalidArgumentError
from gridrobust.grid_model import AggregationSpec, CellKey, GridPanel, Role


class BlockKey(NamedTuple):
    block_row: int
    block_col: int
    period: int


def block_indices(rows, cols, k: int, row_shift: int, col_shift: int):
    """Vectorised block coordinates ``floor((index + shift) / k)``.

    No validation: shifts outside ``[0, k)`` are accepted, which the
    periodicity tests rely on.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    return np.floor_divide(rows + row_shift, k), np.floor_divide(cols + col_shift, k)


def block_of(cell: CellKey, spec: AggregationSpec) -> BlockKey:
    row, col, period = cell
    return BlockKey(
        (row + spec.row_shift) // spec.multiplier,
        (col + spec.column_shift) // spec.multiplier,
        period,
    )


def _group_starts(keys: tuple[np.ndarray, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Sort order and group start offsets for lexicographic key columns."""
    order = np.lexsort(keys[::-1])
    n = order.shape[0]
    if n == 0:
        return order, np.zeros(0, dtype=np.int64)
    change = np.zeros(n, dtype=bool)
    change[0] = True
    for key in keys:
        sk = key[order]
        change[1:] |= sk[1:] != sk[:-1]
    return order, np.flatnonzero(change)


def any_rule(values: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """Per-group max over non-missing members; NaN when every member is missing."""
    filled = np.where(np.isnan(values), -np.inf, values)
    out = np.maximum.reduceat(filled, starts)
    out[np.isneginf(out)] = np.nan
    return out


def mean_rule(values: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """Per-group mean over non-missing members; NaN when every member is missing."""
    present = ~np.isnan(values)
    totals = np.add.reduceat(np.where(present, values, 0.0), starts)
    counts = np.add.reduceat(present.astype(np.int64), starts)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = totals / counts
    means[counts == 0] = np.nan
    # keep rounding inside [min, max] of the members
    lo = np.minimum.reduceat(np.where(present, values, np.inf), starts)
    hi = np.maximum.reduceat(np.where(present, values, -np.inf), starts)
    ok = counts > 0
    means[ok] = np.clip(means[ok], lo[ok], hi[ok])
    return means


RULES = {
    Role.OUTCOME_BINARY: any_rule,
    Role.TREATMENT_BINARY: any_rule,
    Role.CELL_BINARY: any_rule,
    Role.CELL_CONTINUOUS: mean_rule,
    Role.COUNTRY_CONTINUOUS: mean_rule,
}


def aggregate(panel: GridPanel, spec: AggregationSpec) -> GridPanel:
    """Aggregate ``panel`` into the blocks defined by ``spec``.

    Each output record is one occupied block within one period, keyed by
    block coordinates. The output cell side is ``k`` times the input side.
    """
    if not isinstance(spec, AggregationSpec):
        raise InvalidArgumentError(f"expected an AggregationSpec, got {type(spec).__name__}")
    k = spec.multiplier
    if k == 1:
        return panel

    brow, bcol = block_indices(panel.rows, panel.cols, k, spec.row_shift, spec.column_shift)
    order, starts = _group_starts((brow, bcol, panel.periods))
    values = panel.values[order]
    out = np.empty((starts.shape[0], len(panel.variables)), dtype=np.float64)
    for j, var in enumerate(panel.variables):
        if starts.shape[0]:
            out[:, j] = RULES[var.role](values[:, j], starts)
    first = order[starts]
    return GridPanel(
        brow[first], bcol[first], panel.periods[first], out,
        panel.variables, panel.base_side_km * k,
    )


def block_members(panel: GridPanel, spec: AggregationSpec) -> dict[BlockKey, list[CellKey]]:
    """Map every occupied block to its member cells (for inspection and tests)."""
    members: dict[BlockKey, list[CellKey]] = {}
    for key in panel.keys():
        members.setdefault(block_of(key, spec), []).append(key)
    return members
