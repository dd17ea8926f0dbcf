"""
Aggregating a small panel
=========================

Binary variables take the any-rule inside a block, continuous ones the mean.
The shift moves the block origin diagonally, so edge blocks can be partial.
"""

import numpy as np

from gridrobust.aggregation import aggregate, block_members
from gridrobust.grid_model import AggregationSpec, GridPanel, Role, VariableSpec

rng = np.random.default_rng(1)
rr, cc = np.indices((4, 4))
n = rr.size
values = np.column_stack([
    (rng.random(n) < 0.2).astype(float),
    (rng.random(n) < 0.4).astype(float),
    rng.normal(100, 20, n).round(1),
])
values[3, 2] = np.nan
panel = GridPanel(
    rr.ravel(), cc.ravel(), np.zeros(n, int), values,
    (VariableSpec("onset", Role.OUTCOME_BINARY),
     VariableSpec("drought", Role.TREATMENT_BINARY),
     VariableSpec("population", Role.CELL_CONTINUOUS)),
    base_side_km=55,
)

for s in (0, 1):
    spec = AggregationSpec(2, s)
    out = aggregate(panel, spec)
    print(f"\nk=2, s={s}: {out.n_records} blocks, side {out.base_side_km:g} km")
    members = block_members(panel, spec)
    for key, rec in out.cells.items():
        print(f"  block {key[:2]} <- {len(members[key])} cells:", rec)
