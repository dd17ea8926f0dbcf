import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridrobust.errors import (
    ConfigurationError,
    DegenerateResponseError,
    EmptyDesignError,
    InvalidArgumentError,
    SeparationError,
    SingularDesignError,
)
from gridrobust.glm import DesignMatrix, fit_logit, listwise_delete, one_tailed_p_positive, two_tailed_p
from gridrobust.grid_model import GridPanel

from conftest import VARIABLES
from oracles import is_separated, newton_logit, upper_normal_tail

X8 = [-1.5, -0.8, -0.3, 0.1, 0.4, 0.9, 1.3, 2.0]
Y8 = [0, 0, 1, 0, 1, 0, 1, 1]
# Frozen from oracles.newton_logit on the design above.
ORACLE_8 = [-0.3620856508400424, 1.3646271558122463]


def design(columns, y, treatment=None):
    return DesignMatrix.from_columns([(f"x{j}", c) for j, c in enumerate(columns)], y, treatment)


def random_design(rng, n, p):
    """Non-separated random logit design with ``p`` covariates."""
    X = rng.normal(size=(n, p)) * rng.uniform(0.3, 3.0, size=p)
    beta = rng.normal(scale=0.7, size=p)
    eta = 0.2 + X @ beta
    y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(float)
    return X, y


def test_intercept_only_half():
    fit = fit_logit(design([], [0, 1, 0, 1, 1, 0]))
    assert fit.coefficients[0] == pytest.approx(0.0, abs=1e-12)
    assert fit.converged


def test_eight_row_design_matches_oracle():
    fit = fit_logit(design([X8], Y8))
    np.testing.assert_allclose(fit.coefficients, ORACLE_8, atol=1e-6)
    X = np.column_stack([np.ones(8), X8])
    np.testing.assert_allclose(newton_logit(X, Y8), ORACLE_8, atol=1e-12)


def test_rescaling_covariate():
    base = fit_logit(design([X8], Y8))
    scaled = fit_logit(design([np.array(X8) * 10], Y8))
    assert scaled.coefficients[1] == pytest.approx(base.coefficients[1] / 10, rel=1e-8)
    assert scaled.z_values[1] == pytest.approx(base.z_values[1], abs=1e-8)
    assert scaled.p_one_tailed_positive[1] == pytest.approx(base.p_one_tailed_positive[1], abs=1e-8)


def test_standard_errors_are_inverse_information():
    fit = fit_logit(design([X8], Y8))
    X = np.column_stack([np.ones(8), X8])
    p = 1 / (1 + np.exp(-X @ fit.coefficients))
    info = X.T @ (X * (p * (1 - p))[:, None])
    np.testing.assert_allclose(fit.standard_errors, np.sqrt(np.diag(np.linalg.inv(info))), rtol=1e-10)
    np.testing.assert_allclose(fit.z_values, fit.coefficients / fit.standard_errors)
    for z, p1 in zip(fit.z_values, fit.p_one_tailed_positive):
        assert p1 == pytest.approx(upper_normal_tail(z), abs=1e-12)


@pytest.mark.parametrize("z, expected, tol", [(0.0, 0.5, 0.0), (1.6449, 0.05, 1e-4), (-3.0, 0.99865, 1e-5)])
def test_one_tailed_p_examples(z, expected, tol):
    assert abs(one_tailed_p_positive(z) - expected) <= tol


def test_one_tailed_p_against_series_oracle():
    assert one_tailed_p_positive(1.6449) == pytest.approx(0.0499952174683463, abs=1e-15)
    assert one_tailed_p_positive(-3.0) == pytest.approx(0.9986501019683699, abs=1e-15)


@pytest.mark.parametrize("z", [float("nan"), float("inf"), -float("inf"), "abc"])
def test_one_tailed_p_rejects_non_finite(z):
    with pytest.raises(InvalidArgumentError):
        one_tailed_p_positive(z)


def test_two_tailed_p():
    assert two_tailed_p(0.0) == 1.0
    assert two_tailed_p(1.6449) == pytest.approx(2 * 0.0499952174683463, abs=1e-15)
    assert two_tailed_p(-1.6449) == pytest.approx(two_tailed_p(1.6449), abs=1e-15)


def test_degenerate_response():
    with pytest.raises(DegenerateResponseError):
        fit_logit(design([X8], [0] * 8))
    with pytest.raises(DegenerateResponseError):
        fit_logit(design([X8], [1] * 8))


def test_singular_design_names_column():
    x = np.array(X8)
    with pytest.raises(SingularDesignError) as err:
        fit_logit(design([x, 2 * x - 1], Y8))
    assert err.value.column == "x1"
    with pytest.raises(SingularDesignError) as err:
        fit_logit(design([np.ones(8)], Y8))
    assert err.value.column == "x0"


def test_too_few_rows_is_singular():
    with pytest.raises(SingularDesignError):
        fit_logit(design([[0.1, 0.5]], [0, 1]))


def test_complete_separation_detected():
    x = np.array([-3, -2, -1, -0.5, 0.5, 1, 2, 3.0])
    with pytest.raises(SeparationError):
        fit_logit(design([x], (x > 0).astype(float)))


def test_max_iter_returns_unconverged_iterate():
    fit = fit_logit(design([X8], Y8), max_iter=1)
    assert not fit.converged
    assert fit.n_iterations == 1
    assert np.all(np.isfinite(fit.coefficients))


def test_design_validation():
    with pytest.raises(InvalidArgumentError):
        DesignMatrix(("a",), np.zeros((3, 1)), [0, 1, 0])
    with pytest.raises(InvalidArgumentError):
        design([[1, np.nan, 2]], [0, 1, 0])
    with pytest.raises(InvalidArgumentError):
        design([[1, 2, 3]], [0, 2, 0])


@given(st.integers(0, 2**32 - 1), st.integers(20, 200), st.integers(0, 5))
def test_matches_newton_oracle_on_random_designs(seed, n, p):
    rng = np.random.default_rng(seed)
    X, y = random_design(rng, n, p)
    d = design(list(X.T), y)
    if y.min() == y.max() or is_separated(d.X, y):
        with pytest.raises((DegenerateResponseError, SeparationError)):
            if fit_logit(d).converged:
                raise SeparationError("converged on a separated design")
        return
    expected = newton_logit(d.X, y)
    try:
        fit = fit_logit(d)
    except SeparationError:
        # the guard may only fire when the finite MLE itself is beyond the bound
        assert np.max(np.abs(expected)) > 30.0
        return
    assert fit.converged
    assert np.max(np.abs(fit.score)) <= 1e-8
    np.testing.assert_allclose(fit.coefficients, expected, atol=1e-6)
    # interior probabilities, checked as finite log-probabilities (doubles round expit(40) to 1.0)
    eta = d.X @ fit.coefficients
    assert np.all(np.isfinite(-np.logaddexp(0, -eta))) and np.all(np.isfinite(-np.logaddexp(0, eta)))


class LoglikRecorder:
    """Re-runs IRLS with max_iter = 1, 2, ... and records each log-likelihood."""

    @staticmethod
    def trace(d, upto):
        return [fit_logit(d, max_iter=i).log_likelihood for i in range(1, upto + 1)]


@given(st.integers(0, 2**32 - 1))
def test_loglik_non_decreasing(seed):
    rng = np.random.default_rng(seed)
    X, y = random_design(rng, 60, 3)
    if y.min() == y.max():
        return
    d = design(list(X.T), y)
    try:
        trace = LoglikRecorder.trace(d, 6)
    except SeparationError:
        return
    assert all(b >= a - 1e-12 * abs(a) for a, b in zip(trace, trace[1:]))


def test_listwise_delete(small_panel):
    d = listwise_delete(small_panel, ["drought", "population"])
    onset, drought, pop = (small_panel.column(n) for n in ("onset", "drought", "population"))
    complete = ~(np.isnan(onset) | np.isnan(drought) | np.isnan(pop))
    assert d.n_rows == complete.sum()
    assert d.names == ("(Intercept)", "drought", "population")
    assert d.treatment == "drought" and d.treatment_index == 1
    np.testing.assert_array_equal(d.y, onset[complete])


def test_listwise_delete_no_missing():
    panel = GridPanel([0, 0, 1], [0, 1, 0], [0, 0, 0], [[0, 1, 0, 1.0, 2.0]] * 3, VARIABLES, 55.0)
    assert listwise_delete(panel, ["drought"]).n_rows == 3


def test_listwise_delete_drops_missing_population():
    vals = [[0, 1, 0, 1.0, 2.0], [1, 0, 0, np.nan, 2.0], [0, 0, 1, 3.0, 1.0]]
    panel = GridPanel([0, 0, 1], [0, 1, 0], [0, 0, 0], vals, VARIABLES, 55.0)
    d = listwise_delete(panel, ["drought", "population"])
    assert d.n_rows == 2
    np.testing.assert_array_equal(d.y, [0, 0])


def test_listwise_delete_errors():
    vals = [[0, np.nan, 0, 1.0, 2.0], [1, np.nan, 0, 1.0, 2.0]]
    panel = GridPanel([0, 0], [0, 1], [0, 0], vals, VARIABLES, 55.0)
    with pytest.raises(EmptyDesignError):
        listwise_delete(panel, ["drought"])
    with pytest.raises(ConfigurationError):
        listwise_delete(panel, ["rainfall"])
    with pytest.raises(ConfigurationError):
        listwise_delete(panel, ["population"], treatment="drought")
