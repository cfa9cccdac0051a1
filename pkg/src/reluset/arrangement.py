"""Datasets, ReLU activation-pattern enumeration, and cone geometry.

An activation pattern is the binary mask diag(D) = 1(X h >= 0) realized by
some strict witness h (no zero rows of X h). The cone attached to a pattern
is K = {u : (2D - I) X u >= 0}, the region of weight space where the ReLU
acts linearly with that pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .config import DEFAULTS, Config
from .errors import DegenerateData, LimitExceeded, NoConvergence, ShapeMismatch

MODE_REGRESSION = "reg"
MODE_INTERPOLATION = "interp"

# Margin below which an LP witness is not considered strictly feasible.
_STRICT_TOL = 1e-9


def relu(x):
    return np.maximum(x, 0.0)


@dataclass(frozen=True)
class Dataset:
    """Training data plus problem-mode switches.

    X holds the raw inputs (rows = samples); when has_bias is set, the
    effective design appends an all-ones column. has_skip adds an
    unregularized linear block on the effective design. beta is the weight
    decay strength (ignored and normalized to 1 in interpolation mode).
    """

    X: np.ndarray
    y: np.ndarray
    beta: float = 1.0
    mode: str = MODE_REGRESSION
    has_bias: bool = False
    has_skip: bool = False
    loss: str = "squared"

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ShapeMismatch(f"design matrix must be n x d with n,d >= 1, got {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ShapeMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ShapeMismatch("X and y must be finite")
        if self.mode not in (MODE_REGRESSION, MODE_INTERPOLATION):
            raise ShapeMismatch(f"unknown mode {self.mode!r}")
        if self.loss != "squared":
            raise ShapeMismatch(f"unsupported loss {self.loss!r}")
        if self.mode == MODE_REGRESSION and not self.beta > 0:
            raise ShapeMismatch("regression requires beta > 0")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def effective_design(self) -> np.ndarray:
        """X with the all-ones bias column appended when has_bias is set."""
        if self.has_bias:
            return np.hstack([self.X, np.ones((self.n, 1))])
        return self.X.copy()

    @property
    def d_eff(self) -> int:
        return self.X.shape[1] + (1 if self.has_bias else 0)

    @property
    def effective_beta(self) -> float:
        """Regularization actually used: beta in regression, 1 in interpolation."""
        return float(self.beta) if self.mode == MODE_REGRESSION else 1.0


@dataclass(frozen=True)
class ActivationPattern:
    """One activation mask and a strict witness realizing it."""

    mask: tuple
    witness: np.ndarray = field(compare=False, repr=False)

    def diagonal(self) -> np.ndarray:
        return np.asarray(self.mask, dtype=float)


class PatternBasis:
    """Ordered, duplicate-free list of all activation patterns of a dataset."""

    def __init__(self, patterns, design):
        self.patterns = list(patterns)
        self.design = np.asarray(design, dtype=float)

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def __getitem__(self, i):
        return self.patterns[i]

    @property
    def masks(self):
        return [p.mask for p in self.patterns]

    def index_of(self, mask) -> int:
        key = tuple(int(b) for b in mask)
        for i, p in enumerate(self.patterns):
            if p.mask == key:
                return i
        raise KeyError(f"mask {key} not in basis")


@dataclass(frozen=True)
class ConeHandle:
    """The polyhedral cone K = {u : G u >= 0} of one activation pattern."""

    pattern: ActivationPattern
    G: np.ndarray

    def contains(self, u, tol=None) -> bool:
        tol = DEFAULTS.tol_feas if tol is None else tol
        scale = 1.0 + float(np.linalg.norm(u))
        return bool(np.all(self.G @ u >= -tol * scale))


def cone(dataset: Dataset, pattern: ActivationPattern) -> ConeHandle:
    """Build the cone handle of one pattern over the effective design."""
    Xe = dataset.effective_design
    m = pattern.diagonal()
    G = (2.0 * m[:, None] - 1.0) * Xe
    return ConeHandle(pattern=pattern, G=G)


def cones(dataset: Dataset, basis: PatternBasis):
    return [cone(dataset, p) for p in basis]


def _strict_witness(rows, signs):
    """Maximize the margin t with sign_j rows_j . h >= t, |h|_inf <= 1.

    Returns the witness h when the optimal margin is strictly positive,
    else None.
    """
    rows = np.asarray(rows, dtype=float)
    k, d = rows.shape
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-signs[:, None] * rows, np.ones((k, 1))])
    b_ub = np.zeros(k)
    bounds = [(-1.0, 1.0)] * d + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0 or -res.fun <= _STRICT_TOL:
        return None
    return np.asarray(res.x[:d], dtype=float)


def enumerate_patterns(dataset: Dataset, config: Config = DEFAULTS) -> PatternBasis:
    """All activation patterns of the dataset, lexicographic by mask.

    Incremental hyperplane insertion: rows are added one at a time and each
    existing region is split when both signs of the new row are strictly
    feasible against the rows seen so far. Exact duplicate rows are
    deduplicated during enumeration and re-expanded in the output masks.
    """
    Xe = dataset.effective_design
    n = Xe.shape[0]
    row_norms = np.linalg.norm(Xe, axis=1)
    if np.any(row_norms == 0.0):
        bad = int(np.argmin(row_norms))
        raise DegenerateData(f"row {bad} of the effective design is zero")

    # Deduplicate exact duplicate rows; remember the representative of each.
    unique_rows = []
    rep_of_row = []
    for i in range(n):
        for j, r in enumerate(unique_rows):
            if np.array_equal(Xe[i], r):
                rep_of_row.append(j)
                break
        else:
            rep_of_row.append(len(unique_rows))
            unique_rows.append(Xe[i])
    U = np.asarray(unique_rows)
    m = U.shape[0]

    # regions: list of (mask over rows seen so far, witness)
    regions = [((), np.zeros(Xe.shape[1]))]
    for k in range(m):
        rows_so_far = U[: k + 1]
        new_regions = []
        for mask, h in regions:
            s = float(U[k] @ h)
            candidates = []
            if s > _STRICT_TOL:
                candidates.append((mask + (1,), h, True))
                candidates.append((mask + (0,), h, False))
            elif s < -_STRICT_TOL:
                candidates.append((mask + (0,), h, True))
                candidates.append((mask + (1,), h, False))
            else:
                candidates.append((mask + (1,), h, False))
                candidates.append((mask + (0,), h, False))
            for cand_mask, base_h, keeps_witness in candidates:
                if keeps_witness:
                    new_regions.append((cand_mask, base_h))
                    continue
                signs = np.where(np.asarray(cand_mask) == 1, 1.0, -1.0)
                w = _strict_witness(rows_so_far, signs)
                if w is not None:
                    new_regions.append((cand_mask, w))
        regions = new_regions
        if len(regions) > config.pattern_cap:
            raise LimitExceeded(
                f"pattern count exceeds cap {config.pattern_cap} after row {k + 1}"
            )

    expanded = []
    for mask, h in regions:
        full = tuple(int(mask[rep_of_row[i]]) for i in range(n))
        expanded.append(ActivationPattern(mask=full, witness=h))
    expanded.sort(key=lambda p: p.mask)
    return PatternBasis(expanded, Xe)


def nnls_linear(A, b, lin=None, max_iter=None):
    """min_{c >= 0} 0.5 ||A c - b||^2 + lin . c  by a Lawson-Hanson iteration.

    Deterministic active-set loop (most-negative-gradient pivot, lowest
    index on ties). Returns the coefficient vector; raises NoConvergence
    when the iteration cap is hit with the optimality test still failing.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    k = A.shape[1]
    lin = np.zeros(k) if lin is None else np.asarray(lin, dtype=float)
    c = np.zeros(k)
    passive = np.zeros(k, dtype=bool)
    if max_iter is None:
        max_iter = 30 * k + 300
    gram = A.T @ A
    atb = A.T @ b
    scale = 1.0 + float(np.abs(atb).max(initial=0.0)) + float(np.abs(lin).max(initial=0.0))
    tol = 1e-11 * scale
    # tiny ridge keeps the passive-set solves consistent when captured
    # columns are (nearly) dependent; its bias is far below the tolerance
    mu = 1e-12 * (1.0 + float(np.trace(gram)) / max(k, 1))
    for _ in range(max_iter):
        w = atb - gram @ c - lin
        w_masked = np.where(passive, -np.inf, w)
        j = int(np.argmax(w_masked))
        if w_masked[j] <= tol:
            break
        passive[j] = True
        for _inner in range(2 * k + 10):
            idx = np.flatnonzero(passive)
            sub = gram[np.ix_(idx, idx)] + mu * np.eye(idx.size)
            rhs = atb[idx] - lin[idx]
            try:
                sol = np.linalg.solve(sub, rhs)
            except np.linalg.LinAlgError:
                sol, *_ = np.linalg.lstsq(sub, rhs, rcond=None)
            if np.all(sol > 0.0):
                c = np.zeros(k)
                c[idx] = sol
                break
            old = c[idx]
            neg = sol <= 0.0
            denom = old[neg] - sol[neg]
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = np.where(denom > 0, old[neg] / denom, np.inf)
            alpha = float(np.min(steps)) if steps.size else 0.0
            alpha = min(max(alpha, 0.0), 1.0)
            moved = old + alpha * (sol - old)
            c = np.zeros(k)
            c[idx] = np.where(moved > tol, moved, 0.0)
            passive = c > 0.0
            if not passive.any():
                break
    w = atb - gram @ c - lin
    free_bad = float(np.where(passive, -np.inf, w).max(initial=-np.inf)) > 10.0 * tol
    passive_bad = bool(passive.any()) and \
        float(np.abs(np.where(passive, w, 0.0)).max(initial=0.0)) > 100.0 * tol + mu * (
            1.0 + float(np.abs(c).max(initial=0.0)))
    if free_bad or passive_bad:
        raise NoConvergence("nonnegative least-squares active-set budget exhausted")
    return c


def project_onto_cone(cone: ConeHandle, w, config: Config = DEFAULTS) -> np.ndarray:
    """Euclidean projection onto K = {u : G u >= 0}.

    Uses the polar decomposition: the projection equals w + G^T lam where
    lam solves the nonnegative least-squares problem min ||G^T lam + w||.
    """
    w = np.asarray(w, dtype=float).ravel()
    G = cone.G
    if G.shape[1] != w.shape[0]:
        raise ShapeMismatch(f"cone is in R^{G.shape[1]}, w in R^{w.shape[0]}")
    scale = 1.0 + float(np.linalg.norm(w))
    if np.all(G @ w >= -config.tol_feas * scale):
        return w.copy()
    lam = nnls_linear(G.T, -w)
    return w + G.T @ lam


def cover_bound(n: int, d: int) -> int:
    """Upper bound 2 * sum_{k<d} C(n-1, k) on the number of patterns."""
    if n < 1 or d < 1:
        raise ShapeMismatch("cover_bound needs n, d >= 1")
    return 2 * sum(math.comb(n - 1, k) for k in range(min(d, n)))
