"""
The robustness sweep: every (multiplier, shift) specification, aggregated
once, then subsampled and re-fitted ``n_subsamples`` times.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from gridrobust.aggregation import aggregate
from gridrobust.errors import ConfigurationError, FitError, InvalidArgumentError
from gridrobust.glm import fit_logit, listwise_delete
from gridrobust.grid_model import AggregationSpec, GridPanel
from gridrobust.sampling import SubsamplePlan, derive_seed, subsample

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepConfig:
    max_multiplier: int = 6
    plan: SubsamplePlan = field(default_factory=SubsamplePlan)
    model_variables: tuple[str, ...] = ()
    treatment_name: str = ""
    independent_shifts: bool = False

    def __post_init__(self):
        object.__setattr__(self, "model_variables", tuple(self.model_variables))
        if isinstance(self.max_multiplier, bool) or not isinstance(self.max_multiplier, int) or self.max_multiplier < 1:
            raise InvalidArgumentError(f"max_multiplier must be an integer >= 1, got {self.max_multiplier!r}")
        if not isinstance(self.plan, SubsamplePlan):
            raise ConfigurationError("plan must be a SubsamplePlan")
        if self.treatment_name not in self.model_variables:
            raise ConfigurationError(
                f"treatment {self.treatment_name!r} is not among model variables {list(self.model_variables)}"
            )

    def validate_against(self, panel: GridPanel) -> None:
        missing = [name for name in self.model_variables if not panel.has_variable(name)]
        if missing:
            raise ConfigurationError(f"unknown model variables {missing}; panel has {list(panel.variable_names)}")
        if panel.outcome.name in self.model_variables:
            raise ConfigurationError(f"outcome {panel.outcome.name!r} cannot be a model variable")


@dataclass(frozen=True)
class SweepRow:
    k: int
    s: int
    m: int
    seed: int
    n_obs: int
    coefficient: float
    se: float
    z: float
    p_one_tailed: float
    converged: bool
    error_code: str | None = None
    col_shift: int | None = None

    @property
    def ok(self) -> bool:
        return self.error_code is None

    @property
    def spec_key(self) -> tuple:
        return (self.k, self.s) if self.col_shift is None else (self.k, self.s, self.col_shift)

    def same_as(self, other: "SweepRow") -> bool:
        """Field-wise equality that treats NaN as equal to NaN."""
        for a, b in zip(_astuple(self), _astuple(other)):
            if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
                continue
            if a != b:
                return False
        return True


def _astuple(row: SweepRow) -> tuple:
    return (row.k, row.s, row.m, row.seed, row.n_obs, row.coefficient, row.se, row.z,
            row.p_one_tailed, row.converged, row.error_code, row.col_shift)


class SweepResult:
    """All sweep rows in canonical ``(k, s, m)`` order."""

    def __init__(self, rows: Sequence[SweepRow] = ()):
        self.rows = tuple(sorted(rows, key=lambda r: (r.k, r.s, -1 if r.col_shift is None else r.col_shift, r.m)))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[SweepRow]:
        return iter(self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SweepResult):
            return NotImplemented
        return len(self.rows) == len(other.rows) and all(a.same_as(b) for a, b in zip(self.rows, other.rows))

    __hash__ = None

    def specs(self) -> list[tuple]:
        seen = {}
        for row in self.rows:
            seen.setdefault(row.spec_key, None)
        return list(seen)

    def for_spec(self, k: int, s: int, col_shift: int | None = None) -> list[SweepRow]:
        key = (k, s) if col_shift is None else (k, s, col_shift)
        return [row for row in self.rows if row.spec_key == key]

    def coefficients(self) -> np.ndarray:
        return np.array([row.coefficient for row in self.rows], dtype=float)

    def __repr__(self) -> str:
        failed = sum(not row.ok for row in self.rows)
        return f"SweepResult(n_rows={len(self.rows)}, n_specs={len(self.specs())}, failed={failed})"


def enumerate_specs(max_multiplier: int, independent_shifts: bool = False) -> list[AggregationSpec]:
    """All ``(k, s)`` with ``1 <= k <= K`` and ``0 <= s < k``, ordered by k then s.

    With ``independent_shifts`` every ``(s_row, s_col)`` pair is produced,
    giving k**2 partitions per multiplier.
    """
    if isinstance(max_multiplier, bool) or not isinstance(max_multiplier, int) or max_multiplier < 1:
        raise InvalidArgumentError(f"max_multiplier must be an integer >= 1, got {max_multiplier!r}")
    if independent_shifts:
        return [AggregationSpec(k, s, c) for k in range(1, max_multiplier + 1) for s in range(k) for c in range(k)]
    return [AggregationSpec(k, s) for k in range(1, max_multiplier + 1) for s in range(k)]


def _failed_row(spec, m, seed, n_obs, code):
    nan = float("nan")
    return SweepRow(spec.multiplier, spec.shift, m, seed, n_obs, nan, nan, nan, nan, False, code, spec.col_shift)


def run_spec(panel: GridPanel, spec: AggregationSpec, config: SweepConfig) -> list[SweepRow]:
    """Aggregate once for ``spec`` and fit every subsample."""
    aggregated = aggregate(panel, spec)
    plan = config.plan
    rows = []
    for m in range(plan.n_subsamples):
        seed = derive_seed(plan.base_seed, spec.multiplier, spec.shift, m, spec.col_shift)
        sample = subsample(aggregated, plan.keep_rate, seed)
        n_obs = 0
        try:
            design = listwise_delete(sample, config.model_variables, config.treatment_name)
            n_obs = design.n_rows
            fit = fit_logit(design)
        except FitError as exc:
            log.debug("spec %s subsample %d failed: %s", spec, m, exc)
            rows.append(_failed_row(spec, m, seed, n_obs, exc.code))
            continue
        j = fit.index(config.treatment_name)
        rows.append(SweepRow(
            k=spec.multiplier,
            s=spec.shift,
            m=m,
            seed=seed,
            n_obs=fit.n_obs,
            coefficient=float(fit.coefficients[j]),
            se=float(fit.standard_errors[j]),
            z=float(fit.z_values[j]),
            p_one_tailed=float(fit.p_one_tailed_positive[j]),
            converged=bool(fit.converged),
            col_shift=spec.col_shift,
        ))
    return rows


def _run_spec_args(args):
    return run_spec(*args)


def run_sweep(panel: GridPanel, config: SweepConfig, jobs: int = 1) -> SweepResult:
    """Run the full robustness sweep.

    Specifications are independent work units; with ``jobs > 1`` they run in
    a process pool and are merged back in canonical order, so the result does
    not depend on ``jobs``. Single-fit failures become rows carrying an error
    code instead of aborting the sweep.
    """
    config.validate_against(panel)
    specs = enumerate_specs(config.max_multiplier, config.independent_shifts)
    work = [(panel, spec, config) for spec in specs]
    if jobs is None or jobs < 1:
        raise InvalidArgumentError(f"jobs must be >= 1, got {jobs!r}")
    if jobs == 1 or len(specs) == 1:
        chunks = [_run_spec_args(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(specs))) as pool:
            chunks = list(pool.map(_run_spec_args, work))
    rows = [row for chunk in chunks for row in chunk]
    result = SweepResult(rows)
    failed = sum(not row.ok for row in rows)
    log.info("sweep finished: %d specs, %d fits, %d failed", len(specs), len(rows), failed)
    return result
