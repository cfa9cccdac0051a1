"""Irreducibility, pruning, critical widths, and connectivity regimes.

A point of the optimal set is irreducible when its active generators are
linearly independent (relative to the skip span when one is present).
Pruning walks any optimal point to an irreducible one along a piecewise
linear path inside the optimal set, strictly shrinking the support at
each step. The critical widths are

    m* : smallest width whose networks can realize an optimum,
    M* : largest support of an irreducible optimum,

found by exhaustive subset search over the generators, and each width m
is labeled with the connectivity guarantees that hold at that width.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import convex_core
from .config import Config, DEFAULTS
from .dual_polytope import OptimalPolytope
from .errors import LimitExceeded, NoSolution

__all__ = [
    "BELOW_EQUIVALENCE",
    "FINITE_SET",
    "CONTINUUM_EXISTS",
    "ISOLATED_POINT_EXISTS",
    "PERMUTATIONS_CONNECTED",
    "FULLY_CONNECTED",
    "RegimeReport",
    "is_irreducible",
    "prune_to_irreducible",
    "minimal_support_point",
    "critical_widths",
    "regime_flags",
]

BELOW_EQUIVALENCE = "BELOW_EQUIVALENCE"
FINITE_SET = "FINITE_SET"
CONTINUUM_EXISTS = "CONTINUUM_EXISTS"
ISOLATED_POINT_EXISTS = "ISOLATED_POINT_EXISTS"
PERMUTATIONS_CONNECTED = "PERMUTATIONS_CONNECTED"
FULLY_CONNECTED = "FULLY_CONNECTED"


@dataclass(frozen=True)
class RegimeReport:
    """Critical widths and per-width connectivity flags."""

    m_star: int
    M_star: int
    widths: dict
    generator_count: int
    accepted: tuple
    subsets_tested: int
    n: int

    def flags_for(self, m: int) -> frozenset:
        return regime_flags(m, self.m_star, self.M_star, self.n)

    @property
    def full_connection_width(self) -> int:
        return min(self.m_star + self.M_star, self.n + 1)


# ---------------------------------------------------------------------------
# Irreducibility and pruning
# ---------------------------------------------------------------------------

def _skip_span(polytope: OptimalPolytope):
    if not polytope.has_skip:
        return None
    return convex_core.skip_basis(polytope.dataset)


def _relative_rank(cols: np.ndarray, Q, config: Config) -> int:
    """Rank of ``cols`` modulo the span of Q (orthonormal columns)."""
    if cols.shape[1] == 0:
        return 0
    M = cols if Q is None else cols - Q @ (Q.T @ cols)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > config.rank_tol * sv[0]))


def is_irreducible(polytope: OptimalPolytope, coefficients,
                   config: Config = DEFAULTS) -> bool:
    """True iff the generators carrying positive mass are independent.

    Independence is taken relative to the skip span when the program has
    an unregularized block, since that block absorbs any skip-parallel
    component for free.
    """
    c = np.asarray(coefficients, float)
    support = np.flatnonzero(c > config.positive_tol)
    if support.size == 0:
        return True
    cols = polytope.generator_matrix[:, support]
    return _relative_rank(cols, _skip_span(polytope), config) == support.size


def prune_to_irreducible(polytope: OptimalPolytope, coefficients,
                         config: Config = DEFAULTS):
    """Walk an optimal point to an irreducible one inside the optimal set.

    Returns (irreducible coefficients, path), where path is the list of
    piecewise-linear breakpoints [start, ..., end] visited (empty when the
    input is already irreducible). Each step moves along a null direction
    of the active generators until the first coefficient hits zero, so the
    support shrinks strictly and the fit and objective are preserved.
    """
    c = np.asarray(coefficients, float).copy()
    Q = _skip_span(polytope)
    G = polytope.generator_matrix
    path: list = []
    for _ in range(max(len(c) - 1, 0)):
        support = np.flatnonzero(c > config.positive_tol)
        if support.size == 0:
            break
        cols = G[:, support]
        M = cols if Q is None else cols - Q @ (Q.T @ cols)
        U, sv, Vt = np.linalg.svd(M)
        rank = int(np.sum(sv > config.rank_tol * sv[0])) if sv.size and sv[0] > 0 else 0
        if rank == support.size:
            break
        d = Vt[-1]
        lead = int(np.flatnonzero(np.abs(d) > 1e-12)[0])
        if d[lead] < 0.0:
            d = -d
        pos = d > 1e-12
        steps = c[support][pos] / d[pos]
        t_star = float(steps.min())
        hit = int(np.flatnonzero(pos)[int(np.argmin(steps))])
        if not path:
            path.append(c.copy())
        c_new = c.copy()
        c_new[support] = c[support] - t_star * d
        c_new[support[hit]] = 0.0
        c_new[c_new <= config.positive_tol] = 0.0
        c_new = np.maximum(c_new, 0.0)
        c = c_new
        path.append(c.copy())
    return c, path


def minimal_support_point(polytope: OptimalPolytope,
                          config: Config = DEFAULTS) -> np.ndarray:
    """The first minimum-cardinality point of the optimal set.

    Searches generator subsets in lexicographic order by increasing size
    and returns the coefficient vector of the first subset whose unique
    nonnegative coefficients reproduce the optimal fit. The support size
    of the result equals m*.
    """
    G = polytope.generator_matrix
    n, k = G.shape
    if k > config.generator_cap:
        raise LimitExceeded(
            f"{k} generators exceed the subset-search cap {config.generator_cap}")
    Q = _skip_span(polytope)
    skip_cols = Q if Q is not None else np.zeros((n, 0))
    y_star = polytope.y_star
    scale = 1.0 + float(np.abs(y_star).max(initial=0.0))
    if k == 0:
        resid = y_star if Q is None else y_star - Q @ (Q.T @ y_star)
        if float(np.abs(resid).max(initial=0.0)) > config.subset_residual * scale:
            raise NoSolution("no generators, yet the optimal fit is nonzero")
        return np.zeros(0)
    for t in range(1, min(n, k) + 1):
        for idx in itertools.combinations(range(k), t):
            S = G[:, list(idx)]
            A = np.hstack([S, skip_cols])
            if _relative_rank(S, Q, config) != t:
                continue
            coef, *_ = np.linalg.lstsq(A, y_star, rcond=None)
            if float(np.linalg.norm(A @ coef - y_star)) > config.subset_residual * scale:
                continue
            if np.all(coef[:t] > config.positive_tol):
                c = np.zeros(k)
                c[list(idx)] = coef[:t]
                return c
    raise NoSolution("no generator subset reproduces the optimal fit")


# ---------------------------------------------------------------------------
# Critical widths
# ---------------------------------------------------------------------------

def regime_flags(m: int, m_star: int, M_star: int, n: int) -> frozenset:
    """Connectivity guarantees that hold at width m."""
    flags = set()
    if m < m_star:
        flags.add(BELOW_EQUIVALENCE)
    if m == m_star:
        flags.add(FINITE_SET)
    if m >= m_star + 1:
        flags.add(CONTINUUM_EXISTS)
    if m == M_star:
        flags.add(ISOLATED_POINT_EXISTS)
    if m >= M_star + 1:
        flags.add(PERMUTATIONS_CONNECTED)
    if m >= min(m_star + M_star, n + 1):
        flags.add(FULLY_CONNECTED)
    return frozenset(flags)


def critical_widths(polytope: OptimalPolytope,
                    config: Config = DEFAULTS) -> RegimeReport:
    """Exhaustive subset search for the critical widths m* and M*.

    A subset of generators is accepted when it is linearly independent
    (relative to the skip span) and its unique coefficients reproduce the
    optimal fit with every coefficient strictly positive. m* and M* are
    the smallest and largest accepted cardinalities.
    """
    G = polytope.generator_matrix
    n, k = G.shape
    if k > config.generator_cap:
        raise LimitExceeded(
            f"{k} generators exceed the subset-search cap {config.generator_cap}")
    Q = _skip_span(polytope)
    skip_cols = Q if Q is not None else np.zeros((n, 0))
    r0 = skip_cols.shape[1]
    y_star = polytope.y_star
    scale = 1.0 + float(np.abs(y_star).max(initial=0.0))

    if k == 0:
        resid = y_star if Q is None else y_star - Q @ (Q.T @ y_star)
        if float(np.abs(resid).max(initial=0.0)) > config.subset_residual * scale:
            raise NoSolution("no generators, yet the optimal fit is nonzero")
        return RegimeReport(m_star=0, M_star=0, widths={0: frozenset([FULLY_CONNECTED])},
                            generator_count=0, accepted=(0,), subsets_tested=0, n=n)

    accepted = []
    tested = 0
    for t in range(1, min(n, k) + 1):
        for idx in itertools.combinations(range(k), t):
            tested += 1
            S = G[:, list(idx)]
            A = np.hstack([S, skip_cols])
            if _relative_rank(S, Q, config) != t:
                continue
            coef, *_ = np.linalg.lstsq(A, y_star, rcond=None)
            if float(np.linalg.norm(A @ coef - y_star)) > config.subset_residual * scale:
                continue
            if np.all(coef[:t] > config.positive_tol):
                accepted.append(t)
                break
    if not accepted:
        raise NoSolution("no generator subset reproduces the optimal fit")
    m_star, M_star = min(accepted), max(accepted)
    top = min(m_star + M_star, n + 1)
    widths = {m: regime_flags(m, m_star, M_star, n) for m in range(1, top + 1)}
    return RegimeReport(
        m_star=m_star, M_star=M_star, widths=widths,
        generator_count=k, accepted=tuple(accepted), subsets_tested=tested, n=n)
