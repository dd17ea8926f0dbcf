"""
Block sizes on a 55 km grid
===========================

Coarsening a grid by a multiplier k merges k x k base cells into one block.
"""

from gridrobust import grid_model as gm

for k in range(1, 7):
    area = gm.aggregated_area_km2(55, k)
    diag = gm.block_diagonal_km(55, k)
    print(f"k={k}: {area:>9,.0f} km^2, diagonal {diag:6.1f} km")
