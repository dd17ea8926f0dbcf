"""Rare-event subsampling: all positives plus a seeded share of the negatives."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from gridrobust.errors import ConfigurationError, InvalidArgumentError
from gridrobust.grid_model import GridPanel, Role


@dataclass(frozen=True)
class SubsamplePlan:
    keep_rate: float = 0.05
    n_subsamples: int = 30
    base_seed: int = 0

    def __post_init__(self):
        _check_keep_rate(self.keep_rate)
        if isinstance(self.n_subsamples, bool) or not isinstance(self.n_subsamples, int) or self.n_subsamples < 1:
            raise InvalidArgumentError(f"n_subsamples must be an integer >= 1, got {self.n_subsamples!r}")
        if isinstance(self.base_seed, bool) or not isinstance(self.base_seed, int) or self.base_seed < 0:
            raise InvalidArgumentError(f"base_seed must be a non-negative integer, got {self.base_seed!r}")


def _check_keep_rate(keep_rate):
    if isinstance(keep_rate, bool) or not isinstance(keep_rate, (int, float)) or not 0.0 < keep_rate <= 1.0:
        raise InvalidArgumentError(f"keep_rate must be in (0, 1], got {keep_rate!r}")


def negatives_to_keep(keep_rate: float, n_negatives: int) -> int:
    """``round_half_up(keep_rate * n_negatives)`` in decimal arithmetic.

    Decimal avoids binary artefacts such as 0.05 * 1000 landing just below 50.
    """
    _check_keep_rate(keep_rate)
    exact = Decimal(repr(float(keep_rate))) * n_negatives
    return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def derive_seed(base_seed: int, k: int, s: int, m: int, col_shift: int | None = None) -> int:
    """Independent 64-bit seed for subsample ``m`` of specification ``(k, s)``.

    Mixing is done by numpy's SeedSequence hash, so nearby tuples give
    unrelated streams.
    """
    words = [int(base_seed), int(k), int(s), int(m)]
    if col_shift is not None:
        words.append(int(col_shift))
    if min(words) < 0:
        raise InvalidArgumentError(f"seed components must be non-negative, got {tuple(words)}")
    return int(np.random.SeedSequence(words).generate_state(1, dtype=np.uint64)[0])


def subsample(panel: GridPanel, keep_rate: float, seed: int) -> GridPanel:
    """Keep every positive-outcome record and an exact share of negatives.

    Records with a missing outcome are dropped first. The retained negatives
    are drawn uniformly without replacement with a PCG64 generator seeded by
    ``seed``; the output keeps canonical record order.
    """
    outcome = [v for v in panel.variables if v.role is Role.OUTCOME_BINARY]
    if len(outcome) != 1:
        raise ConfigurationError("panel has no outcome variable")
    _check_keep_rate(keep_rate)
    y = panel.column(outcome[0].name)
    positives = np.flatnonzero(y == 1.0)
    negatives = np.flatnonzero(y == 0.0)
    n_keep = negatives_to_keep(keep_rate, negatives.shape[0])
    if n_keep >= negatives.shape[0]:
        chosen = negatives
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        chosen = negatives[rng.choice(negatives.shape[0], size=n_keep, replace=False)]
    keep = np.sort(np.concatenate([positives, chosen]))
    return panel.take(keep)
