import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from gridrobust.grid_model import GridPanel, Role, VariableSpec  # noqa: E402

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROLES = {
    "onset": Role.OUTCOME_BINARY,
    "drought": Role.TREATMENT_BINARY,
    "capital": Role.CELL_BINARY,
    "population": Role.CELL_CONTINUOUS,
    "polity": Role.COUNTRY_CONTINUOUS,
}
VARIABLES = tuple(VariableSpec(name, role) for name, role in ROLES.items())


def random_panel(rng, height, width, periods, missing=0.1, positive_rate=0.3, base_side_km=55.0):
    """Full rectangular panel with every role represented and ``missing`` share of NaNs."""
    rr, cc, tt = np.meshgrid(np.arange(height), np.arange(width), np.arange(periods), indexing="ij")
    n = rr.size
    values = np.column_stack([
        (rng.random(n) < positive_rate).astype(float),
        (rng.random(n) < 0.4).astype(float),
        (rng.random(n) < 0.1).astype(float),
        rng.normal(10.0, 3.0, n),
        rng.integers(-10, 11, n).astype(float),
    ])
    values[rng.random(values.shape) < missing] = np.nan
    return GridPanel(rr.ravel(), cc.ravel(), tt.ravel(), values, VARIABLES, base_side_km)


@pytest.fixture
def rng():
    return np.random.default_rng(20220207)


@pytest.fixture
def small_panel(rng):
    return random_panel(rng, 6, 7, 2)
