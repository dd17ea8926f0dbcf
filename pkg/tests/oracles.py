"""Independent reference implementations used only by the tests.

Nothing here imports the code under test's numerics: the logit oracle is a
plain Newton method with Armijo backtracking on the negative log-likelihood,
the normal tail comes from a high-precision Maclaurin series of erf, and the
aggregation/concordance oracles are dictionary-based brute force.
"""

import math

import mpmath
import numpy as np
from scipy.optimize import linprog


def newton_logit(X, y, tol=1e-12, max_iter=200):
    """Maximise the Bernoulli-logit likelihood by damped Newton steps."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    beta = np.zeros(X.shape[1])

    def nll(b):
        eta = X @ b
        # log(1 + e^eta) - y*eta, evaluated stably
        return float(np.sum(np.maximum(eta, 0) + np.log1p(np.exp(-np.abs(eta))) - y * eta))

    f = nll(beta)
    for _ in range(max_iter):
        eta = X @ beta
        p = 1.0 / (1.0 + np.exp(-eta))
        grad = X.T @ (p - y)
        if np.max(np.abs(grad)) < tol:
            break
        hess = (X * (p * (1 - p))[:, None]).T @ X
        direction = -np.linalg.solve(hess, grad)
        t = 1.0
        slope = grad @ direction
        while nll(beta + t * direction) > f + 1e-4 * t * slope and t > 1e-12:
            t *= 0.5
        beta = beta + t * direction
        f = nll(beta)
    return beta


def is_separated(X, y):
    """True when some direction b != 0 has (2y-1) * x_i.b >= 0 for every row.

    Solved as an LP over the box |b| <= 1; the finite MLE exists iff the
    best achievable total margin is zero.
    """
    X = np.asarray(X, dtype=float)
    sign = 2 * np.asarray(y, dtype=float) - 1
    A = sign[:, None] * X
    res = linprog(-A.sum(axis=0), A_ub=-A, b_ub=np.zeros(len(A)), bounds=[(-1, 1)] * X.shape[1], method="highs")
    return res.status == 0 and -res.fun > 1e-7


def upper_normal_tail(z, digits=40):
    """1 - Phi(z) from the Maclaurin series of erf at high precision."""
    with mpmath.workdps(digits + 40):
        x = mpmath.mpf(z) / mpmath.sqrt(2)
        term = x
        total = x
        n = 0
        while True:
            n += 1
            term = term * (-1) * x * x / n
            add = term / (2 * n + 1)
            total += add
            if abs(add) < mpmath.mpf(10) ** (-(digits + 20)) and n > 5:
                break
        erf = 2 / mpmath.sqrt(mpmath.pi) * total
        return float((1 - erf) / 2)


def naive_aggregate(records, roles, k, s_row, s_col=None):
    """Brute-force aggregation over ``{(row, col, period): {name: value}}``.

    Missing values are ``None`` or NaN. Returns ``{(brow, bcol, period): {name: value}}``.
    """
    s_col = s_row if s_col is None else s_col
    blocks = {}
    for (r, c, t), rec in records.items():
        key = ((r + s_row) // k, (c + s_col) // k, t)
        blocks.setdefault(key, []).append(rec)
    out = {}
    for key, members in blocks.items():
        agg = {}
        for name, role in roles.items():
            vals = [m[name] for m in members if m[name] is not None and not math.isnan(m[name])]
            if not vals:
                agg[name] = None
            elif role.endswith("binary"):
                agg[name] = 1.0 if any(v == 1.0 for v in vals) else 0.0
            else:
                agg[name] = sum(vals) / len(vals)
        out[key] = agg
    return out


def naive_concordance(height, width, x_cells, y_cells, k, s):
    """Materialise each block's member list and apply the any-rule directly."""
    members = {}
    for r in range(height):
        for c in range(width):
            members.setdefault(((r + s) // k, (c + s) // k), []).append((r, c))
    concordant = 0
    for cells in members.values():
        bx = any(cell in x_cells for cell in cells)
        by = any(cell in y_cells for cell in cells)
        concordant += bx == by
    return concordant, len(members)
