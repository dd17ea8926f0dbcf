"""Robustness testing for grid-cell data: aggregate cells into k-multiples
under every shifted origin, re-fit a rare-event logit per specification and
subsample, and report how the treatment estimate moves."""

__version__ = "0.1.0"

from gridrobust.aggregation import BlockKey, aggregate, block_of
from gridrobust.errors import (
    ConfigurationError,
    DataError,
    DegenerateResponseError,
    EmptyDesignError,
    FitError,
    GridRobustError,
    InvalidArgumentError,
    SchemaError,
    SeparationError,
    SingularDesignError,
    ValidationError,
)
from gridrobust.glm import DesignMatrix, FitResult, fit_logit, listwise_delete, one_tailed_p_positive
from gridrobust.grid_model import (
    MISSING,
    AggregationSpec,
    CellKey,
    GridPanel,
    Role,
    VariableSpec,
    aggregated_area_km2,
    block_diagonal_km,
    is_missing,
)
from gridrobust.io import RoleConfig, load_config, load_panel, read_results, write_panel, write_results
from gridrobust.report import PlotMode, PlotSpec, Tail, render_scatter, summarize
from gridrobust.sampling import SubsamplePlan, derive_seed, subsample
from gridrobust.sweep import SweepConfig, SweepResult, SweepRow, enumerate_specs, run_sweep
from gridrobust.synth import PlantedMap, concordance, plant_measurement_error
