"""
Logistic regression fitted by iteratively reweighted least squares.

Standard errors come from the inverse observed information at the optimum
(identical to the expected information under the canonical logit link), and
p-values use the normal reference distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gridrobust.errors import (
    ConfigurationError,
    DegenerateResponseError,
    EmptyDesignError,
    InvalidArgumentError,
    SeparationError,
    SingularDesignError,
)
from gridrobust.grid_model import GridPanel

INTERCEPT = "(Intercept)"

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 50
DEFAULT_MAX_HALVINGS = 20
DEFAULT_SEPARATION_BOUND = 30.0


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Complete-case design. Column 0 is the intercept."""

    names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    treatment: str | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[1] != len(self.names):
            raise InvalidArgumentError(f"design shape {X.shape} does not match {len(self.names)} names and {y.shape[0]} responses")
        if not np.isfinite(X).all():
            raise InvalidArgumentError("design contains missing or non-finite values")
        if not np.isin(y, (0.0, 1.0)).all():
            raise InvalidArgumentError("response must be 0/1")
        if X.shape[1] == 0 or not np.all(X[:, 0] == 1.0):
            raise InvalidArgumentError("first design column must be the intercept (all ones)")
        if self.treatment is not None and self.treatment not in self.names:
            raise InvalidArgumentError(f"treatment {self.treatment!r} is not a design column")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_columns(cls, columns: Sequence[tuple[str, Sequence[float]]], response, treatment=None) -> "DesignMatrix":
        """Build from ``(name, values)`` covariate columns; the intercept is prepended."""
        y = np.asarray(response, dtype=np.float64)
        names = (INTERCEPT,) + tuple(name for name, _ in columns)
        X = np.column_stack([np.ones_like(y)] + [np.asarray(v, dtype=np.float64) for _, v in columns])
        return cls(names, X, y, treatment)

    @property
    def n_rows(self) -> int:
        return int(self.X.shape[0])

    @property
    def columns(self) -> list[tuple[str, np.ndarray]]:
        return [(name, self.X[:, j]) for j, name in enumerate(self.names)]

    @property
    def response(self) -> np.ndarray:
        return self.y

    @property
    def treatment_index(self) -> int | None:
        return None if self.treatment is None else self.names.index(self.treatment)


@dataclass(frozen=True, eq=False)
class FitResult:
    names: tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    z_values: np.ndarray
    p_one_tailed_positive: np.ndarray
    converged: bool
    n_iterations: int
    n_obs: int
    log_likelihood: float
    score: np.ndarray

    def index(self, name: str) -> int:
        return self.names.index(name)

    def summary_for(self, name: str) -> dict:
        j = self.index(name)
        return {
            "coefficient": float(self.coefficients[j]),
            "se": float(self.standard_errors[j]),
            "z": float(self.z_values[j]),
            "p_one_tailed": float(self.p_one_tailed_positive[j]),
        }


def one_tailed_p_positive(z: float) -> float:
    """Upper-tail normal probability ``1 - Phi(z)``.

    Uses ``erfc`` so the far tails keep full relative precision.
    """
    try:
        z = float(z)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"z must be a real number, got {z!r}") from None
    if not math.isfinite(z):
        raise InvalidArgumentError(f"z must be finite, got {z!r}")
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def two_tailed_p(z: float) -> float:
    p = one_tailed_p_positive(z)
    return min(1.0, 2.0 * min(p, 1.0 - p))


def _expit(eta):
    e = np.exp(-np.abs(eta))
    return np.where(eta >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _loglik(X, y, beta):
    eta = X @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def first_dependent_column(X: np.ndarray, rtol: float = 1e-10) -> int | None:
    """Index of the first column lying in the span of the columns before it."""
    if X.shape[0] < X.shape[1]:
        return X.shape[0]
    _, R = np.linalg.qr(X, mode="reduced")
    norms = np.linalg.norm(X, axis=0)
    for j in range(X.shape[1]):
        if norms[j] == 0.0 or abs(R[j, j]) <= rtol * norms[j]:
            return j
    return None


def fit_logit(
    design: DesignMatrix,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    max_halvings: int = DEFAULT_MAX_HALVINGS,
    separation_bound: float = DEFAULT_SEPARATION_BOUND,
) -> FitResult:
    """Maximum-likelihood logit fit by IRLS with step-halving.

    Each iteration solves the weighted least-squares problem for the working
    response; if the new iterate lowers the log-likelihood the step is halved
    (up to ``max_halvings`` times). Iteration stops once the score max-norm
    is at most ``tol``. If ``max_iter`` is hit first, the best iterate is
    returned with ``converged=False``.

    Raises
    ------
    SingularDesignError
        The design is rank deficient; the message names the first offending column.
    DegenerateResponseError
        The response is all zeros or all ones.
    SeparationError
        Some coefficient exceeded ``separation_bound`` in absolute value.
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    if max_iter < 1:
        raise InvalidArgumentError("max_iter must be >= 1")
    X, y = design.X, design.y
    n, p = X.shape
    if n == 0:
        raise EmptyDesignError("design has no rows")
    if y.min() == y.max():
        raise DegenerateResponseError(f"response is constant ({int(y[0])}) across all {n} rows")
    if n <= p:
        raise SingularDesignError(f"design has {n} rows for {p} columns", column=design.names[min(n, p - 1)])
    bad = first_dependent_column(X)
    if bad is not None:
        name = design.names[bad]
        raise SingularDesignError(f"design is rank deficient at column {name!r}", column=name)

    beta = np.zeros(p)
    ybar = y.mean()
    beta[0] = math.log(ybar / (1.0 - ybar))
    ll = _loglik(X, y, beta)
    converged = False
    iterations = 0
    while True:
        mu = _expit(X @ beta)
        score = X.T @ (y - mu)
        if np.max(np.abs(score)) <= tol:
            converged = True
            break
        if iterations >= max_iter:
            break
        # floored weights keep the working response finite; the fixed point is still score == 0
        w = np.maximum(mu * (1.0 - mu), 1e-12)
        sw = np.sqrt(w)
        working = X @ beta + (y - mu) / w
        target, *_ = np.linalg.lstsq(X * sw[:, None], working * sw, rcond=None)
        step = target - beta
        score_norm = np.max(np.abs(score))
        for _ in range(max_halvings + 1):
            candidate = beta + step
            new_ll = _loglik(X, y, candidate)
            if new_ll >= ll:
                break
            # near the optimum the likelihood change drops below rounding; judge by the score
            if ll - new_ll <= 1e-13 * max(1.0, abs(ll)):
                new_score = X.T @ (y - _expit(X @ candidate))
                if np.max(np.abs(new_score)) < score_norm:
                    break
            step = step / 2.0
        else:
            # no ascent direction at working precision; treat as stalled
            iterations += 1
            break
        iterations += 1
        beta, ll = candidate, new_ll
        if np.max(np.abs(beta)) > separation_bound:
            j = int(np.argmax(np.abs(beta)))
            raise SeparationError(
                f"coefficient for {design.names[j]!r} reached {beta[j]:.3g} (bound {separation_bound}); "
                "the response is (quasi-)completely separated"
            )

    mu = _expit(X @ beta)
    score = X.T @ (y - mu)
    info = X.T @ (X * (mu * (1.0 - mu))[:, None])
    cov = np.linalg.inv(info)
    se = np.sqrt(np.diag(cov))
    z = beta / se
    pvals = np.array([one_tailed_p_positive(v) for v in z])
    return FitResult(
        names=design.names,
        coefficients=beta,
        standard_errors=se,
        z_values=z,
        p_one_tailed_positive=pvals,
        converged=converged,
        n_iterations=iterations,
        n_obs=n,
        log_likelihood=ll,
        score=score,
    )


def listwise_delete(panel: GridPanel, variable_names: Sequence[str], treatment: str | None = None) -> DesignMatrix:
    """Complete-case design for the outcome on ``variable_names``.

    Rows with any missing value among the selected variables or the outcome
    are dropped and an intercept is prepended. ``treatment`` defaults to the
    panel's treatment variable when it is among the selected names.
    """
    outcome = panel.outcome.name
    names = [name for name in variable_names if name != outcome]
    for name in names:
        if not panel.has_variable(name):
            raise ConfigurationError(f"unknown variable {name!r}; panel has {list(panel.variable_names)}")
    if len(set(names)) != len(names):
        raise ConfigurationError(f"duplicate names in {list(variable_names)}")
    if treatment is None and panel.treatment.name in names:
        treatment = panel.treatment.name
    if treatment is not None and treatment not in names:
        raise ConfigurationError(f"treatment {treatment!r} is not among the model variables")

    cols = np.column_stack([panel.column(name) for name in names]) if names else np.empty((panel.n_records, 0))
    y = panel.column(outcome)
    keep = ~np.isnan(y) & ~np.isnan(cols).any(axis=1)
    if not keep.any():
        raise EmptyDesignError(f"no complete cases among {[outcome] + names}")
    X = np.column_stack([np.ones(int(keep.sum())), cols[keep]])
    return DesignMatrix((INTERCEPT, *names), X, y[keep], treatment)
