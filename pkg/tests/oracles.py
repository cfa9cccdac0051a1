"""Independent oracles used to validate the library.

Everything here is deliberately naive and implemented with tools the
library itself does not use for the same job (cvxpy interior-point
programs, exhaustive enumeration), so agreement is meaningful. Oracles
take raw arrays, never library objects.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog

try:
    import cvxpy as cp
except ImportError:  # pragma: no cover
    cp = None


def oracle_patterns(X):
    """All strict activation masks of X by brute force over 2^n candidates.

    A mask is accepted when some h satisfies sign(X h) matching it strictly
    on every row, found by maximizing the margin with an LP.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    masks = []
    for bits in itertools.product((0, 1), repeat=n):
        sigma = np.where(np.asarray(bits) == 1, 1.0, -1.0)
        # maximize t  s.t.  sigma_i x_i^T h >= t,  |h| <= 1  (variables h, t)
        c = np.zeros(d + 1)
        c[-1] = -1.0
        A_ub = np.hstack([-sigma[:, None] * X, np.ones((n, 1))])
        b_ub = np.zeros(n)
        bounds = [(-1.0, 1.0)] * d + [(None, None)]
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if res.status == 0 and -res.fun > 1e-9:
            masks.append(np.asarray(bits, dtype=int))
    return masks


def oracle_project_cone(G, w):
    """Projection of w onto {u : G u >= 0} as an interior-point QP."""
    G = np.asarray(G, dtype=float)
    w = np.asarray(w, dtype=float)
    u = cp.Variable(w.size)
    prob = cp.Problem(cp.Minimize(cp.sum_squares(u - w)), [G @ u >= 0])
    prob.solve(solver=cp.CLARABEL)
    return np.asarray(u.value, dtype=float)


def oracle_solve(X_eff, y, masks, beta, mode, has_skip):
    """Cone-constrained group LASSO solved by cvxpy (CLARABEL SOCP).

    mode: "reg" (squared loss, weight beta) or "interp" (exact fit,
    minimize the sum of group norms). Returns (optimal value, fit).
    """
    X_eff = np.asarray(X_eff, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X_eff.shape
    P = len(masks)
    U = [cp.Variable(d) for _ in range(P)]
    V = [cp.Variable(d) for _ in range(P)]
    cons = []
    fit = 0
    for mask, u, v in zip(masks, U, V):
        m = np.asarray(mask, dtype=float)
        S = (2.0 * np.diag(m) - np.eye(n)) @ X_eff
        cons += [S @ u >= 0, S @ v >= 0]
        DX = np.diag(m) @ X_eff
        fit = fit + DX @ (u - v)
    if has_skip:
        a0 = cp.Variable(d)
        fit = fit + X_eff @ a0
    norms = cp.sum([cp.norm(u, 2) + cp.norm(v, 2) for u, v in zip(U, V)])
    if mode == "reg":
        obj = 0.5 * cp.sum_squares(fit - y) + beta * norms
        prob = cp.Problem(cp.Minimize(obj), cons)
    else:
        prob = cp.Problem(cp.Minimize(norms), cons + [fit == y])
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"oracle_solve status {prob.status}")
    fit_val = np.zeros(n)
    for mask, u, v in zip(masks, U, V):
        DX = np.diag(np.asarray(mask, dtype=float)) @ X_eff
        fit_val += DX @ (u.value - v.value)
    if has_skip:
        fit_val += X_eff @ a0.value
    return float(prob.value), fit_val


def oracle_accepted_cardinalities(G, y_star, skip_basis=None, tol=1e-8):
    """Exhaustive width search over generator subsets.

    G: columns are signed generators. skip_basis: columns spanning the
    unregularized block's range (or None). Returns the sorted list of
    subset sizes t for which some t-subset is linearly independent
    (relative to the skip span) and reproduces y* with strictly positive
    coefficients.
    """
    G = np.asarray(G, dtype=float)
    n, k = G.shape
    if skip_basis is None:
        skip_basis = np.zeros((n, 0))
    skip_basis = np.asarray(skip_basis, dtype=float)
    r0 = np.linalg.matrix_rank(skip_basis) if skip_basis.size else 0
    accepted = set()
    for t in range(1, min(n, k) + 1):
        for idx in itertools.combinations(range(k), t):
            S = G[:, list(idx)]
            A = np.hstack([S, skip_basis])
            if np.linalg.matrix_rank(A) != t + r0:
                continue
            coef, *_ = np.linalg.lstsq(A, y_star, rcond=None)
            if np.linalg.norm(A @ coef - y_star) > tol:
                continue
            if np.all(coef[:t] > 1e-9):
                accepted.add(t)
                break
    return sorted(accepted)


def oracle_max_over_region(X_eff, mask, nu):
    """max |nu^T (X u)_+| over the unit ball of one linear region, via QP.

    On the region K = {u : (2D - I) X u >= 0} the map (X u)_+ equals D X u,
    so the maximum of each sign is a cone-constrained linear program over
    the unit ball, solved here as an SOCP.
    """
    X_eff = np.asarray(X_eff, dtype=float)
    m = np.asarray(mask, dtype=float)
    n, d = X_eff.shape
    S = (2.0 * np.diag(m) - np.eye(n)) @ X_eff
    w = X_eff.T @ (m * nu)
    best = 0.0
    for sign in (1.0, -1.0):
        u = cp.Variable(d)
        prob = cp.Problem(cp.Maximize(sign * w @ u), [S @ u >= 0, cp.norm(u, 2) <= 1])
        prob.solve(solver=cp.CLARABEL)
        best = max(best, float(prob.value))
    return best
