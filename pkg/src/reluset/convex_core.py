"""Certified solver for the cone-constrained group LASSO.

Regression mode minimizes  L(fit, y) + beta * sum_i (||u_i|| + ||v_i||)
with fit = sum_i D_i X (u_i - v_i) (+ X a0 with a free skip block) and
u_i, v_i constrained to the cone K_i of pattern i. Interpolation mode
minimizes the sum of group norms subject to fit = y.

The solver is an operator-splitting (consensus ADMM) iteration — one block
holds the group-norm proximal step, one the cone projections, one the loss
— interleaved with a deterministic polish stage that extracts a feasible
dual vector, regenerates the active columns it certifies, re-solves the
restricted master problem, and reports a certified duality gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import linprog

from . import arrangement
from .arrangement import Dataset, PatternBasis, MODE_REGRESSION
from .config import DEFAULTS, Config
from .errors import Infeasible, NoConvergence, ShapeMismatch


@dataclass
class ConvexSolution:
    """Per-pattern blocks (u_i, v_i), optional skip vector, fit and objective."""

    u: np.ndarray  # (P, d)
    v: np.ndarray  # (P, d)
    skip: np.ndarray | None
    fit: np.ndarray  # (n,)
    objective: float


@dataclass
class SolveReport:
    solution: ConvexSolution
    dual_candidate: np.ndarray
    dual_value: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    converged: bool


def _blocks(dataset: Dataset, basis: PatternBasis):
    """The per-pattern matrices D_i X over the effective design."""
    Xe = dataset.effective_design
    return [p.diagonal()[:, None] * Xe for p in basis]


def fit_of(dataset: Dataset, basis: PatternBasis, u, v, skip):
    out = np.zeros(dataset.n)
    for DX, ui, vi in zip(_blocks(dataset, basis), u, v):
        out += DX @ (ui - vi)
    if skip is not None:
        out += dataset.effective_design @ skip
    return out


def objective(dataset: Dataset, solution: ConvexSolution) -> float:
    """Objective of a solution: loss plus weighted group norms.

    Interpolation mode returns the sum of group norms; feasibility of the
    fit is reported separately by the caller.
    """
    u, v = np.asarray(solution.u, float), np.asarray(solution.v, float)
    if u.shape != v.shape or u.ndim != 2 or u.shape[1] != dataset.d_eff:
        raise ShapeMismatch(f"u/v blocks {u.shape}/{v.shape} do not match d_eff {dataset.d_eff}")
    if solution.fit.shape != (dataset.n,):
        raise ShapeMismatch("fit length does not match dataset")
    norms = float(np.linalg.norm(u, axis=1).sum() + np.linalg.norm(v, axis=1).sum())
    if dataset.mode == MODE_REGRESSION:
        return 0.5 * float(np.sum((solution.fit - dataset.y) ** 2)) + dataset.beta * norms
    return norms


# ---------------------------------------------------------------------------
# Dual-side helpers (shared with the certificate module)
# ---------------------------------------------------------------------------

def skip_basis(dataset: Dataset):
    """Orthonormal basis of the unregularized block's range, or None."""
    if not dataset.has_skip:
        return None
    Q, R = np.linalg.qr(dataset.effective_design)
    keep = np.abs(np.diag(R)) > 1e-12 * max(1.0, np.abs(np.diag(R)).max())
    return Q[:, keep]


def dual_projections(dataset: Dataset, basis: PatternBasis, nu, config: Config = DEFAULTS):
    """Cone projections Pi_u[i] = P_{K_i}(-X^T D_i nu), Pi_v[i] = P_{K_i}(+X^T D_i nu).

    The norm of Pi_u[i] equals max_{u in K_i, ||u||<=1} of -nu^T D_i X u,
    the attained value of pattern i's u-side dual constraint.
    """
    Xe = dataset.effective_design
    nu = np.asarray(nu, float)
    Pi_u, Pi_v = [], []
    for p in basis:
        w = Xe.T @ (p.diagonal() * nu)
        K = arrangement.cone(dataset, p)
        Pi_u.append(arrangement.project_onto_cone(K, -w, config))
        Pi_v.append(arrangement.project_onto_cone(K, w, config))
    return np.asarray(Pi_u), np.asarray(Pi_v)


def dual_value(dataset: Dataset, nu) -> float:
    """The dual objective -L*(nu) of a feasible dual vector."""
    nu = np.asarray(nu, float)
    if dataset.mode == MODE_REGRESSION:
        return -0.5 * float(nu @ nu) - float(nu @ dataset.y)
    return -float(nu @ dataset.y)


def restore_dual(dataset: Dataset, basis: PatternBasis, nu, config: Config = DEFAULTS):
    """Nearest useful dual-feasible vector obtained from a candidate.

    Projects onto the skip null space when a skip block is present (its
    multiplier must satisfy X^T nu = 0), then rescales: cones are
    positively homogeneous, so the constraint norms scale linearly and the
    best feasible multiple of the candidate maximizes the dual objective.
    """
    nu = np.asarray(nu, float).copy()
    nrm0 = float(np.linalg.norm(nu))
    Q = skip_basis(dataset)
    if Q is not None:
        nu -= Q @ (Q.T @ nu)
    nrm = float(np.linalg.norm(nu))
    if nrm <= 1e-10 * nrm0 or nrm == 0.0:
        # nothing survives the equality constraint; rescaling would only
        # amplify round-off into a spurious certificate
        return np.zeros_like(nu)
    beta = dataset.effective_beta
    Pi_u, Pi_v = dual_projections(dataset, basis, nu, config)
    eta = max(float(np.linalg.norm(Pi_u, axis=1).max(initial=0.0)),
              float(np.linalg.norm(Pi_v, axis=1).max(initial=0.0)))
    s_max = np.inf if eta <= 0.0 else beta / eta
    if dataset.mode == MODE_REGRESSION:
        s_opt = -float(nu @ dataset.y) / float(nu @ nu)
        s = float(np.clip(s_opt, -s_max, s_max))
    else:
        if not np.isfinite(s_max):
            return np.zeros_like(nu)
        s = s_max if float(nu @ dataset.y) <= 0.0 else -s_max
    return s * nu


# ---------------------------------------------------------------------------
# Restricted master problems
# ---------------------------------------------------------------------------

def _master_regression(dataset, G, config):
    """Restricted primal on captured columns; returns (c, a0, fit)."""
    y = dataset.y
    beta = dataset.beta
    Q = skip_basis(dataset)
    if G.shape[1] == 0:
        c = np.zeros(0)
    else:
        if Q is not None:
            Gr = G - Q @ (Q.T @ G)
            yr = y - Q @ (Q.T @ y)
        else:
            Gr, yr = G, y
        c = arrangement.nnls_linear(Gr, yr, beta * np.ones(G.shape[1]))
    a0 = None
    fit = G @ c if G.shape[1] else np.zeros(dataset.n)
    if dataset.has_skip:
        a0, *_ = np.linalg.lstsq(dataset.effective_design, y - fit, rcond=None)
        fit = fit + dataset.effective_design @ a0
    return c, a0, fit


def _master_interpolation(dataset, G, config):
    """Restricted LP min 1.c s.t. G c (+ X a0) = y, c >= 0.

    Returns (c, a0, fit, nu) with nu the sign-fixed equality multiplier,
    or None when the restricted columns cannot reach y. When the exact
    equality is numerically infeasible (noisy near-duplicate columns), a
    relaxed form |G c - y| <= delta is tried; the small residual is
    repaired downstream.
    """
    y = dataset.y
    k = G.shape[1]
    Xe = dataset.effective_design
    if dataset.has_skip:
        A = np.hstack([G, Xe]) if k else Xe.copy()
        cost = np.concatenate([np.ones(k), np.zeros(Xe.shape[1])])
        bounds = [(0, None)] * k + [(None, None)] * Xe.shape[1]
    else:
        if k == 0:
            if np.linalg.norm(y) <= config.tol_feas:
                return np.zeros(0), None, np.zeros(dataset.n), np.zeros(dataset.n)
            return None
        A = G
        cost = np.ones(k)
        bounds = [(0, None)] * k
    res = linprog(cost, A_eq=A, b_eq=y, bounds=bounds, method="highs")
    if res.status == 0:
        x = res.x
        nu = np.asarray(res.eqlin.marginals, float)
    else:
        delta = 1e-8 * (1.0 + float(np.abs(y).max()))
        A_ub = np.vstack([A, -A])
        b_ub = np.concatenate([y + delta, -y + delta])
        res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if res.status != 0:
            return None
        x = res.x
        marg = np.asarray(res.ineqlin.marginals, float)
        nu = marg[:dataset.n] - marg[dataset.n:]
    c = x[:k]
    a0 = x[k:] if dataset.has_skip else None
    fit = A @ x
    # Fix the multiplier sign so active columns attain -beta (= -1 here).
    support = c > config.positive_tol
    if support.any():
        attained = G[:, support].T @ nu
        if attained.sum() > 0:
            nu = -nu
    return c, a0, fit, nu


# ---------------------------------------------------------------------------
# Column capture and polish
# ---------------------------------------------------------------------------

def _capture_columns(dataset, basis, nu_feasible, tau, store, config):
    """Update the column store with directions certified active-ish by nu.

    A column is kept when its cone's attained value is within the capture
    band  eta >= beta * (1 - tau). Keys are (pattern index, side); the
    latest direction per key wins (the objective is quadratically
    insensitive to small direction error, so drift is harmless).

    An absolute floor keeps numerical noise out: when the true projection
    is (near) zero, normalizing it would manufacture a direction outside
    the cone. Directions are also re-checked for cone membership."""
    beta = dataset.effective_beta
    Pi_u, Pi_v = dual_projections(dataset, basis, nu_feasible, config)
    blocks = _blocks(dataset, basis)
    w_scale = 1.0 + float(np.linalg.norm(dataset.effective_design)) * \
        float(np.linalg.norm(nu_feasible))
    floor = 1e-7 * w_scale
    for i, (pu, pv) in enumerate(zip(Pi_u, Pi_v)):
        K = arrangement.cone(dataset, basis[i])
        for side, pvec in (("u", pu), ("v", pv)):
            nrm = float(np.linalg.norm(pvec))
            if nrm >= max(beta * (1.0 - tau), floor):
                direction = pvec / nrm
                if float((K.G @ direction).min(initial=0.0)) < 0.0:
                    # scrub boundary noise with one more exact projection
                    direction = arrangement.project_onto_cone(K, direction, config)
                    dn = float(np.linalg.norm(direction))
                    if dn < 0.5:
                        continue
                    direction = direction / dn
                sign = 1.0 if side == "u" else -1.0
                store[(i, side)] = (direction, sign * (blocks[i] @ direction))
    return store


def _polish(dataset, basis, nu_seed, store, config):
    """Deterministic certification loop around a dual candidate.

    Returns (best solution, best restored dual, best dual value, gap).
    """
    taus = (1e-3, 0.2, 0.8, 1.0 - 1e-12)
    stage = 0
    nu = np.asarray(nu_seed, float)
    best_sol = None
    best_dual = None
    best_dval = -np.inf
    prev_gap = np.inf
    for _ in range(14):
        nu_t = restore_dual(dataset, basis, nu, config)
        dval = dual_value(dataset, nu_t)
        if dval > best_dval:
            best_dval, best_dual = dval, nu_t
        _capture_columns(dataset, basis, nu_t, taus[stage], store, config)
        keys = sorted(store.keys())
        ordered = {k: store[k] for k in keys}
        G = (np.column_stack([ordered[k][1] for k in keys])
             if keys else np.zeros((dataset.n, 0)))
        try:
            if dataset.mode == MODE_REGRESSION:
                c, a0, fit = _master_regression(dataset, G, config)
                nu_next = fit - dataset.y
            else:
                out = _master_interpolation(dataset, G, config)
                if out is None:
                    stage = min(stage + 1, len(taus) - 1)
                    nu = nu_t if np.linalg.norm(nu_t) > 0 else -dataset.y
                    continue
                c, a0, fit, nu_next = out
        except NoConvergence:
            # restricted master too ill-conditioned this round; keep going
            stage = min(stage + 1, len(taus) - 1)
            nu = nu_t if float(np.linalg.norm(nu_t)) > 0 else -dataset.y
            continue
        cand = _assemble_from_keys(dataset, basis, ordered, c, a0)
        if dataset.mode != MODE_REGRESSION and \
                np.max(np.abs(cand.fit - dataset.y)) > config.tol_feas * (1.0 + np.abs(dataset.y).max()):
            cand = _repair_interpolation_fit(dataset, basis, cand, config)
            if cand is None:
                stage = min(stage + 1, len(taus) - 1)
                nu = nu_next
                continue
        if best_sol is None or cand.objective < best_sol.objective:
            best_sol = cand
        gap = best_sol.objective - best_dval
        if gap <= config.tol_dual:
            return best_sol, best_dual, best_dval, gap
        if gap >= prev_gap - 1e-12:
            stage = min(stage + 1, len(taus) - 1)
        prev_gap = gap
        nu = nu_next
    gap = (best_sol.objective - best_dval) if best_sol is not None else np.inf
    return best_sol, best_dual, best_dval, gap


def _assemble_from_keys(dataset, basis, ordered, c, a0):
    P, d = len(basis), dataset.d_eff
    u = np.zeros((P, d))
    v = np.zeros((P, d))
    for (key, coef) in zip(ordered.keys(), c):
        if coef <= 0.0:
            continue
        i, side = key[0], key[1]
        if side == "u":
            u[i] += coef * ordered[key][0]
        else:
            v[i] += coef * ordered[key][0]
    skip = np.asarray(a0, float) if a0 is not None else None
    fit = fit_of(dataset, basis, u, v, skip)
    sol = ConvexSolution(u=u, v=v, skip=skip, fit=fit, objective=0.0)
    sol.objective = objective(dataset, sol)
    return sol


def _repair_interpolation_fit(dataset, basis, sol, config):
    """Restore an exact data fit by spreading a tiny residual across cones.

    Any vector in the reachable span is a difference of cone members
    (shift by a strict interior witness), so a small fit residual can be
    absorbed with an objective increase proportional to its size.
    Returns the repaired solution, or None when the residual is too large
    to absorb perturbatively.
    """
    y = dataset.y
    r = y - sol.fit
    scale = 1.0 + float(np.abs(y).max())
    if float(np.abs(r).max(initial=0.0)) <= 1e-14 * scale:
        return sol
    if float(np.linalg.norm(r)) > 1e-5 * scale:
        return None
    blocks = _blocks(dataset, basis)
    cols = list(blocks)
    if dataset.has_skip:
        cols.append(dataset.effective_design)
    w, *_ = np.linalg.lstsq(np.hstack(cols), r, rcond=None)
    d = dataset.d_eff
    u = sol.u.copy()
    v = sol.v.copy()
    skip = None if sol.skip is None else sol.skip.copy()
    for i, pat in enumerate(basis):
        wi = w[i * d:(i + 1) * d]
        if float(np.abs(wi).max(initial=0.0)) == 0.0:
            continue
        K = arrangement.cone(dataset, pat)
        h = np.asarray(pat.witness, float)
        Gh = K.G @ h
        Gw = K.G @ wi
        deficits = np.maximum(-Gw, 0.0)
        if float(np.max(deficits * (Gh <= 0.0), initial=0.0)) > 0.0:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            need = np.where(Gh > 0.0, deficits / np.maximum(Gh, 1e-300), 0.0)
        t = float(need.max(initial=0.0)) * (1.0 + 1e-9)
        u[i] = u[i] + wi + t * h
        v[i] = v[i] + t * h
    if dataset.has_skip:
        extra = w[len(basis) * d:]
        skip = extra if skip is None else skip + extra
    fit = fit_of(dataset, basis, u, v, skip)
    repaired = ConvexSolution(u=u, v=v, skip=skip, fit=fit, objective=0.0)
    repaired.objective = objective(dataset, repaired)
    if float(np.abs(fit - y).max(initial=0.0)) > config.tol_feas * scale:
        return None
    return repaired


# ---------------------------------------------------------------------------
# Main solve
# ---------------------------------------------------------------------------

def _check_interpolation_feasible(dataset, basis, config):
    cols = [DX for DX in _blocks(dataset, basis)]
    if dataset.has_skip:
        cols.append(dataset.effective_design)
    M = np.hstack(cols)
    sol, *_ = np.linalg.lstsq(M, dataset.y, rcond=None)
    resid = float(np.linalg.norm(M @ sol - dataset.y))
    if resid > 1e-8 * (1.0 + float(np.abs(dataset.y).max())):
        raise Infeasible(f"interpolation target outside the reachable span (residual {resid:.3e})")


def solve(dataset: Dataset, basis: PatternBasis, config: Config = DEFAULTS) -> SolveReport:
    """Solve the convex program with a certified duality gap.

    Deterministic: zero initialization, fixed penalty schedule, and a
    deterministic polish stage. Raises NoConvergence when the iteration
    budget is exhausted with gap above tolerance, Infeasible when an
    interpolation target is unreachable.
    """
    if dataset.mode != MODE_REGRESSION:
        _check_interpolation_feasible(dataset, basis, config)

    P = len(basis)
    n, d = dataset.n, dataset.d_eff
    blocks = _blocks(dataset, basis)
    has_skip = dataset.has_skip
    N = (2 * P + (1 if has_skip else 0)) * d
    A = np.zeros((n, N))
    for i, DX in enumerate(blocks):
        A[:, i * d:(i + 1) * d] = DX
        A[:, (P + i) * d:(P + i + 1) * d] = -DX
    if has_skip:
        A[:, 2 * P * d:] = dataset.effective_design
    M = 2.0 * np.eye(N) + A.T @ A
    chol = cho_factor(M)

    cone_handles = [arrangement.cone(dataset, p) for p in basis]
    beta = dataset.effective_beta
    y = dataset.y

    z = np.zeros(N)
    x1 = np.zeros(N)
    x2 = np.zeros(N)
    f = np.zeros(n)
    w1 = np.zeros(N)
    w2 = np.zeros(N)
    wf = np.zeros(n)
    rho = float(config.rho_init)

    store: dict = {}
    best_sol = None
    best_dual = None
    best_dval = -np.inf

    def try_polish(nu_seed, iterations):
        nonlocal best_sol, best_dual, best_dval
        sol, nu_t, dval, _ = _polish(dataset, basis, nu_seed, store, config)
        if sol is not None and (best_sol is None or sol.objective < best_sol.objective):
            best_sol = sol
        if nu_t is not None and dval > best_dval:
            best_dval, best_dual = dval, nu_t
        return (best_sol is not None
                and best_sol.objective - best_dval <= config.tol_dual)

    def harvest_splitting_primal():
        # The cone-projection block of the splitting iterate is feasible by
        # construction, so a converged iterate is itself a primal candidate.
        nonlocal best_sol
        u = np.zeros((P, d))
        v = np.zeros((P, d))
        for i in range(P):
            u[i] = x2[i * d:(i + 1) * d]
            v[i] = x2[(P + i) * d:(P + i + 1) * d]
        skip = z[2 * P * d:].copy() if has_skip else None
        fit = fit_of(dataset, basis, u, v, skip)
        cand = ConvexSolution(u=u, v=v, skip=skip, fit=fit, objective=0.0)
        cand.objective = objective(dataset, cand)
        if dataset.mode != MODE_REGRESSION:
            cand = _repair_interpolation_fit(dataset, basis, cand, config)
            if cand is None:
                return
        if best_sol is None or cand.objective < best_sol.objective:
            best_sol = cand

    it = 0
    seed = -y if dataset.mode != MODE_REGRESSION else dataset.y * 0.0
    certified = try_polish(seed, it)
    r_norm = s_norm = np.inf
    chunk = 250
    while not certified and it < config.iter_budget:
        for _ in range(chunk):
            # group-norm prox block
            t = z - w1
            x1 = t.copy()
            for i in range(2 * P):
                blk = t[i * d:(i + 1) * d]
                nrm = float(np.linalg.norm(blk))
                scale = max(0.0, 1.0 - beta / (rho * nrm)) if nrm > 0 else 0.0
                x1[i * d:(i + 1) * d] = scale * blk
            # cone-projection block
            t = z - w2
            x2 = t.copy()
            for i in range(2 * P):
                K = cone_handles[i % P]
                x2[i * d:(i + 1) * d] = arrangement.project_onto_cone(
                    K, t[i * d:(i + 1) * d], config)
            # loss block on the fit consensus
            Az = A @ z
            t = Az - wf
            if dataset.mode == MODE_REGRESSION:
                f = (y + rho * t) / (1.0 + rho)
            else:
                f = y.copy()
            # consensus update
            rhs = (x1 + w1) + (x2 + w2) + A.T @ (f + wf)
            z_new = cho_solve(chol, rhs)
            s_norm = rho * float(np.linalg.norm(z_new - z)) * np.sqrt(3.0)
            z = z_new
            Az = A @ z
            w1 += x1 - z
            w2 += x2 - z
            wf += f - Az
            r_norm = float(np.sqrt(np.linalg.norm(x1 - z) ** 2
                                   + np.linalg.norm(x2 - z) ** 2
                                   + np.linalg.norm(f - Az) ** 2))
            it += 1
            if it % 64 == 0:
                if r_norm > 10.0 * s_norm and rho < 1e6:
                    rho *= 2.0
                    w1 *= 0.5
                    w2 *= 0.5
                    wf *= 0.5
                elif s_norm > 10.0 * r_norm and rho > 1e-6:
                    rho *= 0.5
                    w1 *= 2.0
                    w2 *= 2.0
                    wf *= 2.0
            if r_norm <= config.residual_stop and s_norm <= config.residual_stop:
                break
        harvest_splitting_primal()
        certified = try_polish(-rho * wf, it)
        if r_norm <= config.residual_stop and s_norm <= config.residual_stop and not certified:
            # splitting iteration has stalled at machine precision
            break

    if best_sol is None:
        raise NoConvergence("no feasible primal candidate produced")
    sol, nu_t, dval = best_sol, best_dual, best_dval
    gap = sol.objective - dval
    converged = gap <= config.tol_dual
    report = SolveReport(
        solution=sol,
        dual_candidate=nu_t,
        dual_value=dval,
        primal_residual=r_norm if np.isfinite(r_norm) else 0.0,
        dual_residual=s_norm if np.isfinite(s_norm) else 0.0,
        gap=gap,
        iterations=it,
        converged=converged,
    )
    if not converged:
        raise NoConvergence(
            f"duality gap {gap:.3e} above tolerance {config.tol_dual:.1e} "
            f"after {it} iterations (primal residual {report.primal_residual:.2e})")
    return report
