"""
How the partition changes what we see
=====================================

Three planted 4x4 (or 2x2) maps: coarser cells, a different dividing line,
and an outcome recorded one cell away from where it happened.
"""

from gridrobust.grid_model import AggregationSpec
from gridrobust.synth import CELL_SIZE_DEMO, DIVIDING_LINE_DEMO, MEASUREMENT_ERROR_DEMO, concordance


def show(planted):
    gx, gy = planted.grid(planted.x_cells), planted.grid(planted.y_cells)
    for r in range(planted.height):
        print("  " + " ".join(("X" * gx[r, c] + "Y" * gy[r, c]) or "." for c in range(planted.width)))


print("Cell size")
show(CELL_SIZE_DEMO)
for k in (1, 2):
    print(f"  k={k}: concordant {concordance(CELL_SIZE_DEMO, AggregationSpec(k))}")

print("\nDividing line (k=2)")
show(DIVIDING_LINE_DEMO)
for s in (0, 1):
    print(f"  s={s}: concordant {concordance(DIVIDING_LINE_DEMO, AggregationSpec(2, s))}")

print("\nLocational error")
show(MEASUREMENT_ERROR_DEMO)
for k in (1, 2):
    observed = concordance(MEASUREMENT_ERROR_DEMO, AggregationSpec(k))
    true = concordance(MEASUREMENT_ERROR_DEMO, AggregationSpec(k), use_true=True)
    print(f"  k={k}: observed {observed}, true {true}")
