"""Constructive optimal paths between networks realizing the same optimum.

Two directions of travel are provided. First, the pair of maps between
the two parameter spaces: ``psi`` lifts a coefficient point of the
optimal set to explicit network weights, and ``phi`` projects network
weights back to per-pattern blocks. Second, path constructors that stay
inside the optimal set at every sample: neuron merging (``merge_minimal``),
support reduction for nonnegative decompositions (``reduce_support``),
permutation bridges through an empty slot (``permutation_bridge``), and
the master constructor ``connect`` that joins two optimal networks of
equal width. ``verify_path`` numerically certifies any emitted path.

All paths are piecewise analytic. Each analytic segment is stored as an
exact endpoint pair plus a closed-form sampler, and also densely sampled
for verification and export.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import arrangement, convex_core, dual_polytope, staircase
from .arrangement import Dataset, PatternBasis, MODE_REGRESSION
from .config import Config, DEFAULTS
from .dual_polytope import OptimalPolytope
from .errors import (
    InvalidGeometry,
    NoConvergence,
    NotConnected,
    NotOptimal,
    PreconditionViolated,
    ShapeMismatch,
    WidthTooSmall,
)

__all__ = [
    "MERGE",
    "SPLIT",
    "PERMUTATION_BRIDGE",
    "CARDINALITY_CHANGE",
    "UPDATE1",
    "UPDATE2_PRUNE",
    "SUM_WIDTHS",
    "N_PLUS_ONE",
    "AUTO",
    "NetworkParams",
    "PathEvent",
    "PathSegmentInfo",
    "ParameterPath",
    "PathVerification",
    "network_fit",
    "network_objective",
    "params_equal",
    "permute_params",
    "psi",
    "phi",
    "merge_minimal",
    "reduce_support",
    "permutation_bridge",
    "connect",
    "verify_path",
]

# Event markers on emitted paths.
MERGE = "MERGE"
SPLIT = "SPLIT"
PERMUTATION_BRIDGE = "PERMUTATION_BRIDGE"
CARDINALITY_CHANGE = "CARDINALITY_CHANGE"
UPDATE1 = "UPDATE1"
UPDATE2_PRUNE = "UPDATE2_PRUNE"

# Connection strategies.
SUM_WIDTHS = "SUM_WIDTHS"
N_PLUS_ONE = "N_PLUS_ONE"
AUTO = "AUTO"


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass
class NetworkParams:
    """Width-m network: first-layer rows, second-layer amplitudes, skip.

    ``weights`` has shape (m, d) over the effective design (bias column
    included when the dataset has one) and ``amplitudes`` has shape (m,).
    ``skip`` is the unregularized linear term, present only for datasets
    with a skip block.
    """

    weights: np.ndarray
    amplitudes: np.ndarray
    skip: np.ndarray | None = None

    def __post_init__(self):
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=float))
        self.amplitudes = np.asarray(self.amplitudes, dtype=float).ravel()
        if self.weights.shape[0] != self.amplitudes.shape[0]:
            raise ShapeMismatch(
                f"{self.weights.shape[0]} weight rows vs "
                f"{self.amplitudes.shape[0]} amplitudes")
        if self.skip is not None:
            self.skip = np.asarray(self.skip, dtype=float).ravel()

    @property
    def width(self) -> int:
        return self.weights.shape[0]

    @property
    def cardinality(self) -> int:
        """Number of neurons with a nonzero amplitude."""
        return int(np.count_nonzero(self.amplitudes))

    def copy(self) -> "NetworkParams":
        skip = None if self.skip is None else self.skip.copy()
        return NetworkParams(self.weights.copy(), self.amplitudes.copy(), skip)


@dataclass(frozen=True)
class PathEvent:
    """A marker on a path: what happened and when."""

    kind: str
    time: float
    detail: str = ""


@dataclass(frozen=True)
class PathSegmentInfo:
    """Descriptor of one analytic segment of a path."""

    start: float
    end: float
    kind: str
    detail: str = ""


@dataclass
class ParameterPath:
    """A sampled path in parameter space with its event markers.

    ``samples`` is an ordered tuple of (t, NetworkParams) with strictly
    increasing t spanning [0, 1]; ``segments`` describes the analytic
    pieces the samples were drawn from.
    """

    samples: tuple
    events: tuple = ()
    segments: tuple = ()

    @property
    def start(self) -> NetworkParams:
        return self.samples[0][1]

    @property
    def end(self) -> NetworkParams:
        return self.samples[-1][1]


@dataclass(frozen=True)
class PathVerification:
    """Numerical certificate for a path."""

    passed: bool
    max_objective_deviation: float
    max_feasibility_violation: float
    max_jump: float
    sample_count: int
    opt_value: float


# ---------------------------------------------------------------------------
# Network evaluation
# ---------------------------------------------------------------------------

def network_fit(params: NetworkParams, dataset: Dataset) -> np.ndarray:
    """Model outputs on the dataset rows."""
    Xe = dataset.effective_design
    if params.weights.shape[1] != Xe.shape[1]:
        raise ShapeMismatch(
            f"weights have {params.weights.shape[1]} columns, design has "
            f"{Xe.shape[1]}")
    pre = Xe @ params.weights.T
    out = np.maximum(pre, 0.0) @ params.amplitudes
    if params.skip is not None:
        out = out + Xe @ params.skip
    return out


def network_objective(params: NetworkParams, dataset: Dataset) -> float:
    """Training objective: loss plus half the squared parameter norms.

    Interpolation mode returns only the regularization term; feasibility
    of the fit is reported separately (see :func:`verify_path`).
    """
    beta = dataset.effective_beta
    reg = 0.5 * beta * float(
        np.sum(params.weights ** 2) + np.sum(params.amplitudes ** 2))
    if dataset.mode == MODE_REGRESSION:
        fit = network_fit(params, dataset)
        return 0.5 * float(np.sum((fit - dataset.y) ** 2)) + reg
    return reg


def params_equal(a: NetworkParams, b: NetworkParams) -> bool:
    """Exact equality of two parameter tuples (slot positions included)."""
    if a.width != b.width:
        return False
    if not (np.array_equal(a.weights, b.weights)
            and np.array_equal(a.amplitudes, b.amplitudes)):
        return False
    if (a.skip is None) != (b.skip is None):
        return False
    return a.skip is None or np.array_equal(a.skip, b.skip)


def permute_params(params: NetworkParams, sigma) -> NetworkParams:
    """Slot permutation: result slot j holds input slot sigma[j]."""
    order = _check_permutation(sigma, params.width)
    skip = None if params.skip is None else params.skip.copy()
    return NetworkParams(params.weights[order], params.amplitudes[order], skip)


def _check_permutation(sigma, m: int) -> list:
    order = [int(j) for j in sigma]
    if sorted(order) != list(range(m)):
        raise ShapeMismatch(f"{sigma!r} is not a permutation of 0..{m - 1}")
    return order


def _params_distance(a: NetworkParams, b: NetworkParams) -> float:
    d2 = float(np.sum((a.weights - b.weights) ** 2))
    d2 += float(np.sum((a.amplitudes - b.amplitudes) ** 2))
    if a.skip is not None and b.skip is not None:
        d2 += float(np.sum((a.skip - b.skip) ** 2))
    return math.sqrt(d2)


# ---------------------------------------------------------------------------
# Segment plumbing
# ---------------------------------------------------------------------------

class _Seg:
    """One analytic piece: exact endpoints, interior sampler, events.

    ``events`` fire at the segment start, ``end_events`` at its end.
    The sampler is only consulted for s strictly inside (0, 1).
    """

    def __init__(self, kind, start, end, formula=None, detail="",
                 events=(), end_events=()):
        self.kind = kind
        self.start = start
        self.end = end
        self.formula = formula
        self.detail = detail
        self.events = tuple(events)
        self.end_events = tuple(end_events)

    def at(self, s: float) -> NetworkParams:
        if s <= 0.0:
            return self.start.copy()
        if s >= 1.0:
            return self.end.copy()
        if self.formula is None:
            return self.start.copy()
        return self.formula(s)

    def reversed(self) -> "_Seg":
        flip = {MERGE: SPLIT, SPLIT: MERGE}
        events = tuple((flip.get(k, k), d) for k, d in self.end_events)
        end_events = tuple((flip.get(k, k), d) for k, d in self.events)
        formula = None
        if self.formula is not None:
            fwd = self.formula
            formula = lambda s: fwd(1.0 - s)  # noqa: E731
        return _Seg(self.kind + "-reversed", self.end, self.start, formula,
                    detail=self.detail, events=events, end_events=end_events)


def _permute_seg(seg: _Seg, sigma) -> _Seg:
    fwd = seg.formula
    formula = None if fwd is None else (lambda s: permute_params(fwd(s), sigma))
    return _Seg(seg.kind, permute_params(seg.start, sigma),
                permute_params(seg.end, sigma), formula, detail=seg.detail,
                events=seg.events, end_events=seg.end_events)


def _constant_path(params: NetworkParams, config: Config) -> ParameterPath:
    count = max(config.min_path_samples, 2)
    ts = np.linspace(0.0, 1.0, count)
    samples = tuple((float(t), params.copy()) for t in ts)
    seg = PathSegmentInfo(0.0, 1.0, "constant")
    return ParameterPath(samples=samples, events=(), segments=(seg,))


def _warp(u: float) -> float:
    """Ease-in-out clock for sampling a segment.

    The square-root transfer curves have unbounded speed at their ends;
    sampling them at sin^2(pi u / 2) keeps adjacent samples uniformly
    close without changing the traced point set or the exact endpoints.
    """
    if u <= 0.0 or u >= 1.0:
        return u
    return math.sin(0.5 * math.pi * u) ** 2


def _assemble(segs, config: Config, min_total: int = 0) -> ParameterPath:
    """Concatenate segments on a uniform global clock and sample densely."""
    if not segs:
        raise PreconditionViolated("cannot assemble an empty segment list")
    N = len(segs)
    per = config.samples_per_segment
    if min_total:
        per = max(per, int(math.ceil((min_total - 1) / N)) + 1)
    per = max(per, 2)
    samples = []
    events = []
    infos = []
    for i, seg in enumerate(segs):
        t0, t1 = i / N, (i + 1) / N
        infos.append(PathSegmentInfo(t0, t1, seg.kind, seg.detail))
        for kind, detail in seg.events:
            events.append(PathEvent(kind, t0, detail))
        for kind, detail in seg.end_events:
            events.append(PathEvent(kind, t1, detail))
        locs = np.linspace(0.0, 1.0, per)
        if i > 0:
            locs = locs[1:]
        for s in locs:
            samples.append((t0 + (t1 - t0) * float(s), seg.at(_warp(float(s)))))
    samples[-1] = (1.0, segs[-1].at(1.0))
    return ParameterPath(samples=tuple(samples), events=tuple(events),
                         segments=tuple(infos))


def _move_segment(params: NetworkParams, src: int, dst: int,
                  kind="slot-move", events=(), end_events=()) -> _Seg:
    """Transfer one neuron into an empty slot, preserving fit and norms.

    The destination grows as sqrt(s) while the source shrinks as
    sqrt(1-s), so the fit contribution s + (1-s) and the squared norms
    stay constant along the whole segment.
    """
    w0 = params.weights[src].copy()
    a0 = float(params.amplitudes[src])
    base = params.copy()

    def formula(s, base=base, w0=w0, a0=a0, src=src, dst=dst):
        out = base.copy()
        r_keep, r_move = math.sqrt(1.0 - s), math.sqrt(s)
        out.weights[src] = w0 * r_keep
        out.amplitudes[src] = a0 * r_keep
        out.weights[dst] = w0 * r_move
        out.amplitudes[dst] = a0 * r_move
        return out

    end = params.copy()
    end.weights[src] = 0.0
    end.amplitudes[src] = 0.0
    end.weights[dst] = w0
    end.amplitudes[dst] = a0
    return _Seg(kind, params.copy(), end, formula, detail=f"{src}->{dst}",
                events=events, end_events=end_events)


def _slot_is_zero(params: NetworkParams, j: int) -> bool:
    return params.amplitudes[j] == 0.0 and not params.weights[j].any()


# ---------------------------------------------------------------------------
# The two parameter maps
# ---------------------------------------------------------------------------

def psi(coefficients, polytope: OptimalPolytope, m: int,
        config: Config = DEFAULTS) -> NetworkParams:
    """Lift a coefficient point of the optimal set to network weights.

    Each positive coefficient c_k becomes one neuron (dir_k * sqrt(c_k),
    side_k * sqrt(c_k)); the rest of the width is zero-padded. The
    network objective equals the convex objective of the point exactly.

    Raises WidthTooSmall when the support exceeds ``m``.
    """
    c = np.asarray(coefficients, dtype=float).ravel()
    if c.shape[0] != len(polytope.generators):
        raise ShapeMismatch(
            f"{c.shape[0]} coefficients for {len(polytope.generators)} generators")
    if np.any(c < -config.positive_tol):
        raise PreconditionViolated("coefficients must be nonnegative")
    support = np.flatnonzero(c > 0.0)
    if support.size > m:
        raise WidthTooSmall(
            f"support size {support.size} exceeds the requested width {m}")
    dataset = polytope.dataset
    W = np.zeros((m, dataset.d_eff))
    a = np.zeros(m)
    for slot, k in enumerate(support):
        gen = polytope.generators[k]
        r = math.sqrt(c[k])
        W[slot] = gen.direction * r
        a[slot] = r if gen.side == "u" else -r
    skip = None
    if polytope.has_skip:
        Xe = dataset.effective_design
        resid = polytope.y_star - polytope.generator_matrix @ c
        skip, *_ = np.linalg.lstsq(Xe, resid, rcond=None)
    return NetworkParams(W, a, skip)


def _canonical_pattern_index(w, dataset: Dataset, basis: PatternBasis) -> int:
    """Index of the activation pattern a first-layer vector belongs to.

    Primary rule: the pattern whose mask equals the elementwise sign test
    of the pre-activations. When that mask is not an enumerated cell
    (vector on a cell boundary), the first enumerated cone containing
    the vector is used instead.
    """
    Xe = dataset.effective_design
    pre = Xe @ np.asarray(w, dtype=float)
    mask = tuple(int(v >= 0.0) for v in pre)
    try:
        return basis.index_of(mask)
    except KeyError:
        pass
    slack = 1e-9 * (1.0 + float(np.abs(pre).max(initial=0.0)))
    for i, pattern in enumerate(basis):
        margins = (2.0 * pattern.diagonal() - 1.0) * pre
        if margins.size == 0 or float(margins.min()) >= -slack:
            return i
    raise InvalidGeometry("no enumerated activation pattern contains the neuron")


def phi(params: NetworkParams, dataset: Dataset, basis: PatternBasis,
        config: Config = DEFAULTS) -> convex_core.ConvexSolution:
    """Project network weights to per-pattern blocks.

    Neurons are grouped by (activation pattern, amplitude sign) and their
    mass vectors w_j * |alpha_j| are summed into the matching u (positive)
    or v (negative) block. The objective is preserved exactly for
    balanced networks.
    """
    P, d = len(basis), dataset.d_eff
    if params.weights.shape[1] != d:
        raise ShapeMismatch(
            f"weights have {params.weights.shape[1]} columns, expected {d}")
    u = np.zeros((P, d))
    v = np.zeros((P, d))
    for j in range(params.width):
        alpha = float(params.amplitudes[j])
        w = params.weights[j]
        if alpha == 0.0 or not w.any():
            continue
        idx = _canonical_pattern_index(w, dataset, basis)
        mass = w * abs(alpha)
        if alpha > 0:
            u[idx] += mass
        else:
            v[idx] += mass
    skip = None if params.skip is None else params.skip.copy()
    fit = convex_core.fit_of(dataset, basis, u, v, skip)
    sol = convex_core.ConvexSolution(u=u, v=v, skip=skip, fit=fit, objective=0.0)
    sol.objective = convex_core.objective(dataset, sol)
    return sol


# ---------------------------------------------------------------------------
# Neuron merging
# ---------------------------------------------------------------------------

def _merge_pair_segment(params: NetworkParams, i: int, j: int) -> _Seg:
    """Merge neuron j into neuron i along a norm-preserving curve.

    Both neurons share an activation pattern and amplitude sign, so their
    mass vectors are positively aligned at an optimum; the combined mass
    accumulates in slot i while slot j shrinks to zero as sqrt(1-s).
    """
    s_sign = 1.0 if params.amplitudes[i] > 0 else -1.0
    zi = params.weights[i] * abs(params.amplitudes[i])
    zj = params.weights[j] * abs(params.amplitudes[j])
    wj = params.weights[j].copy()
    aj = float(params.amplitudes[j])
    base = params.copy()

    def merged_slot(out, t):
        omega = zi + t * zj
        r = math.sqrt(float(np.linalg.norm(omega)))
        out.weights[i] = omega / r if r > 0 else 0.0
        out.amplitudes[i] = s_sign * r

    def formula(s, base=base):
        out = base.copy()
        merged_slot(out, s)
        shrink = math.sqrt(1.0 - s)
        out.weights[j] = wj * shrink
        out.amplitudes[j] = aj * shrink
        return out

    end = params.copy()
    merged_slot(end, 1.0)
    end.weights[j] = 0.0
    end.amplitudes[j] = 0.0
    return _Seg("merge", params.copy(), end, formula,
                detail=f"{j}->{i}",
                events=((MERGE, f"neurons {i},{j}"),),
                end_events=((CARDINALITY_CHANGE, "merge complete"),))


def _merge_segments(params: NetworkParams, dataset: Dataset,
                    basis: PatternBasis, config: Config):
    """Segments merging every same-(pattern, sign) pair; returns (segs, end)."""
    segs = []
    current = params.copy()
    while True:
        groups = {}
        for j in range(current.width):
            alpha = float(current.amplitudes[j])
            w = current.weights[j]
            if alpha == 0.0 or not w.any() or float(np.linalg.norm(w)) * abs(alpha) == 0.0:
                continue
            idx = _canonical_pattern_index(w, dataset, basis)
            groups.setdefault((idx, alpha > 0), []).append(j)
        pair = None
        for slots in groups.values():
            if len(slots) >= 2:
                pair = (slots[0], slots[1])
                break
        if pair is None:
            break
        seg = _merge_pair_segment(current, *pair)
        segs.append(seg)
        current = seg.end
    return segs, current


def merge_minimal(params: NetworkParams, dataset: Dataset,
                  basis: PatternBasis | None = None,
                  config: Config = DEFAULTS):
    """Merge neurons sharing a pattern and sign until none remain.

    Returns (minimal network, path). The path starts at ``params``
    exactly, records one MERGE event per absorbed neuron, and preserves
    the objective along every segment. Already-minimal input returns a
    constant path with no events.
    """
    if basis is None:
        basis = arrangement.enumerate_patterns(dataset, config)
    segs, end = _merge_segments(params, dataset, basis, config)
    if not segs:
        return params.copy(), _constant_path(params, config)
    return end, _assemble(segs, config, min_total=config.min_path_samples)


# ---------------------------------------------------------------------------
# Support reduction for nonnegative decompositions
# ---------------------------------------------------------------------------

def _rank_of(M: np.ndarray, config: Config) -> int:
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > config.rank_tol * sv[0]))


def reduce_support(A, B, subset, lam, mu, config: Config = DEFAULTS) -> np.ndarray:
    """Shrink a positive decomposition over B to at most n-m+1 terms.

    Given independent vector families A (size m) and B (size k) in R^n
    with sum(lam_i A_i) = sum(mu_i B_i), mu > 0, and a subset I of A
    whose coefficient sum is positive, returns mu_star >= 0 supported on
    at most n-m+1 vectors of B such that sum(mu_star_i B_i) lies in
    span(A) and its A-coordinates still sum positively over I.

    Each step moves mu along a null direction of the invariance
    constraints until a coordinate hits zero, so the support shrinks
    strictly and both the span membership and the subset sum are
    preserved exactly.
    """
    A_mat = np.column_stack([np.asarray(v, dtype=float).ravel() for v in A])
    B_mat = np.column_stack([np.asarray(v, dtype=float).ravel() for v in B])
    lam = np.asarray(lam, dtype=float).ravel()
    mu = np.asarray(mu, dtype=float).ravel()
    n, m = A_mat.shape
    k = B_mat.shape[1]
    I = sorted(int(i) for i in subset)
    if lam.shape[0] != m or mu.shape[0] != k:
        raise ShapeMismatch("coefficient lengths do not match the vector lists")
    if any(i < 0 or i >= m for i in I):
        raise ShapeMismatch(f"subset {I} out of range for {m} vectors")
    if _rank_of(A_mat, config) != m:
        raise PreconditionViolated("the first vector family is linearly dependent")
    if np.any(mu <= 0.0):
        raise PreconditionViolated("all decomposition coefficients must be positive")
    if not float(lam[I].sum()) > 0.0:
        raise PreconditionViolated("the subset coefficient sum must be positive")
    za, zb = A_mat @ lam, B_mat @ mu
    scale = 1.0 + max(float(np.abs(za).max(initial=0.0)),
                      float(np.abs(zb).max(initial=0.0)))
    if float(np.abs(za - zb).max()) > 1e-8 * scale:
        raise PreconditionViolated("the two decompositions disagree")

    target = n - m + 1
    if k <= target:
        return mu.copy()

    U_full, _, _ = np.linalg.svd(A_mat)
    U_perp = U_full[:, m:]
    pinv_A = np.linalg.pinv(A_mat)
    row_subset = pinv_A[I, :].sum(axis=0)

    mu_cur = mu.copy()
    for _ in range(k):
        S = np.flatnonzero(mu_cur > 0.0)
        if S.size <= target:
            break
        B_S = B_mat[:, S]
        M = np.vstack([U_perp.T @ B_S, (row_subset @ B_S)[None, :]])
        _, sv, Vt = np.linalg.svd(M)
        direction = Vt[-1]
        if float(np.linalg.norm(M @ direction)) > 1e-7 * (1.0 + float(np.abs(M).max())):
            raise NoConvergence("no usable null direction for support reduction")
        tiny = 1e-14
        neg = direction < -tiny
        pos = direction > tiny
        t_plus = float(np.min(mu_cur[S][neg] / -direction[neg])) if neg.any() else np.inf
        t_minus = float(np.min(mu_cur[S][pos] / direction[pos])) if pos.any() else np.inf
        if not np.isfinite(t_plus) and not np.isfinite(t_minus):
            raise NoConvergence("degenerate null direction in support reduction")
        eps = t_plus if t_plus <= t_minus else -t_minus
        new_vals = mu_cur[S] + eps * direction
        if eps >= 0:
            hit = int(np.flatnonzero(neg)[int(np.argmin(mu_cur[S][neg] / -direction[neg]))])
        else:
            hit = int(np.flatnonzero(pos)[int(np.argmin(mu_cur[S][pos] / direction[pos]))])
        new_vals[hit] = 0.0
        new_vals[new_vals <= 1e-12 * max(1.0, float(mu.max()))] = 0.0
        new_vals = np.maximum(new_vals, 0.0)
        mu_cur[S] = new_vals

    _check_reduction(A_mat, B_mat, I, mu_cur, target, scale, config)
    return mu_cur


def _check_reduction(A_mat, B_mat, I, mu_star, target, scale, config):
    """Postcondition check of reduce_support; raises on failure."""
    if int(np.count_nonzero(mu_star)) > target:
        raise NoConvergence(
            f"support {int(np.count_nonzero(mu_star))} still exceeds {target}")
    if np.any(mu_star < 0.0):
        raise NoConvergence("support reduction produced a negative coefficient")
    z = B_mat @ mu_star
    delta, *_ = np.linalg.lstsq(A_mat, z, rcond=None)
    if float(np.abs(A_mat @ delta - z).max(initial=0.0)) > 1e-7 * scale:
        raise NoConvergence("reduced combination left the span of the first family")
    if not float(delta[I].sum()) > 0.0:
        raise NoConvergence("reduced combination lost the positive subset sum")


# ---------------------------------------------------------------------------
# Permutation bridges
# ---------------------------------------------------------------------------

def _null_direction_move(params: NetworkParams, dataset: Dataset, config: Config):
    """Free one slot by sliding amplitudes along a feature null direction.

    Requires the active post-activation features to be linearly
    dependent (always true for optimal networks wider than the largest
    irreducible support). Returns ([segment], end) where the end state
    has at least one exactly-zero slot and the same fit and norms.
    """
    m = params.width
    Xe = dataset.effective_design
    H = np.maximum(Xe @ params.weights.T, 0.0)
    _, sv, Vt = np.linalg.svd(H)
    if sv.size and sv[-1] > 1e-7 * sv[0] and m <= min(H.shape):
        raise PreconditionViolated(
            "active features are linearly independent; no slot can be freed")
    cvec = Vt[-1]
    norms = np.linalg.norm(params.weights, axis=1)
    if np.any((norms == 0.0) | (params.amplitudes == 0.0)):
        raise PreconditionViolated("a slot with zero mass should be reused directly")
    lead = int(np.flatnonzero(np.abs(cvec) > 1e-12 * float(np.abs(cvec).max()))[0])
    if params.amplitudes[lead] * cvec[lead] > 0:
        cvec = -cvec
    movable = params.amplitudes * cvec < 0
    steps = -params.amplitudes[movable] / cvec[movable]
    t_m = float(steps.min())
    hit = int(np.flatnonzero(movable)[int(np.argmin(steps))])
    base = params.copy()
    w0 = params.weights.copy()
    a0 = params.amplitudes.copy()
    signs = np.sign(a0)

    def state(t, base=base):
        out = base.copy()
        val = a0 + t * cvec
        mag = np.abs(val)
        out.weights = w0 * np.sqrt(mag / norms)[:, None]
        out.amplitudes = np.sqrt(norms * mag) * signs
        return out

    end = state(t_m)
    end.weights[hit] = 0.0
    end.amplitudes[hit] = 0.0
    seg = _Seg("free-slot", params.copy(), end, lambda s: state(s * t_m),
               detail=f"slot {hit} emptied",
               end_events=((CARDINALITY_CHANGE, f"slot {hit} emptied"),))
    return [seg], end


def _realize_permutation(params: NetworkParams, sigma, config: Config):
    """Segments rearranging slot contents so slot j ends with input sigma[j].

    Uses three-stage transfers through an empty slot; a transfer into an
    empty member of the pair needs a single stage. Raises NotConnected
    when a rearrangement of nonzero neurons has no empty slot to pass
    through.
    """
    m = params.width
    order = _check_permutation(sigma, m)
    segs = []
    current = params.copy()
    provenance = list(range(m))
    for j in range(m):
        if provenance[j] == order[j]:
            continue
        l = provenance.index(order[j], j)
        zero_j = _slot_is_zero(current, j)
        zero_l = _slot_is_zero(current, l)
        if zero_j and zero_l:
            provenance[j], provenance[l] = provenance[l], provenance[j]
            continue
        spare = [e for e in range(m)
                 if e != j and e != l and _slot_is_zero(current, e)]
        if spare:
            e = spare[0]
            first = _move_segment(current, j, e,
                                  events=((PERMUTATION_BRIDGE, f"swap {j},{l}"),))
            second = _move_segment(first.end, l, j)
            third = _move_segment(second.end, e, l)
            segs.extend([first, second, third])
            current = third.end
        elif zero_j:
            seg = _move_segment(current, l, j,
                                events=((PERMUTATION_BRIDGE, f"swap {j},{l}"),))
            segs.append(seg)
            current = seg.end
        elif zero_l:
            seg = _move_segment(current, j, l,
                                events=((PERMUTATION_BRIDGE, f"swap {j},{l}"),))
            segs.append(seg)
            current = seg.end
        else:
            raise NotConnected(
                "no empty slot available to carry a neuron exchange")
        provenance[j], provenance[l] = provenance[l], provenance[j]
    return segs, current


def permutation_bridge(params: NetworkParams, sigma,
                       polytope: OptimalPolytope,
                       config: Config = DEFAULTS) -> ParameterPath:
    """Path from a network to one of its slot permutations.

    Requires the width to exceed the largest irreducible support so an
    empty slot exists or can be created; the path then exchanges slot
    contents with norm-preserving sqrt transfers. Ends exactly at the
    requested permutation.
    """
    m = params.width
    order = _check_permutation(sigma, m)
    report = staircase.critical_widths(polytope, config)
    if m <= report.M_star:
        raise WidthTooSmall(
            f"width {m} does not exceed the largest irreducible support "
            f"{report.M_star}")
    if order == list(range(m)):
        return _constant_path(params, config)
    prefix = []
    current = params.copy()
    if not any(_slot_is_zero(current, j) for j in range(m)):
        prefix, current = _null_direction_move(current, polytope.dataset, config)
    middle, _ = _realize_permutation(current, order, config)
    suffix = [_permute_seg(seg.reversed(), order) for seg in reversed(prefix)]
    return _assemble(prefix + middle + suffix, config,
                     min_total=config.min_path_samples)


# ---------------------------------------------------------------------------
# Coefficient-space schedules
# ---------------------------------------------------------------------------

def _projected_generators(polytope: OptimalPolytope):
    """Generator columns with any skip-span component removed."""
    G = polytope.generator_matrix
    Q = convex_core.skip_basis(polytope.dataset) if polytope.has_skip else None
    return G if Q is None else G - Q @ (Q.T @ G)


def _snap_small(values: np.ndarray, scale: float) -> np.ndarray:
    out = np.where(np.abs(values) <= 1e-12 * max(scale, 1.0), 0.0, values)
    return np.maximum(out, 0.0)


def _width_n_plus_one_schedule(polytope: OptimalPolytope, c_from, c_to,
                               config: Config):
    """Piecewise-linear coefficient schedule moving mass onto the target.

    Alternates two moves until all mass sits on the target support:
    pruning steps that keep the doubly-tagged active family linearly
    independent (a coefficient is tagged by whether its mass is still
    departing or already arriving), then a transfer step that grows a
    reduced subfamily of target generators while shrinking the departing
    family, keeping at most n+1 simultaneously active terms. The total
    departing mass strictly decreases across outer iterations, which
    bounds the loop.
    """
    Ghat = _projected_generators(polytope)
    K = len(polytope.generators)
    c_from = np.asarray(c_from, dtype=float)
    c_to = np.asarray(c_to, dtype=float)
    scale = max(float(c_from.max(initial=0.0)), float(c_to.max(initial=0.0)), 1.0)
    b_keys = [int(k) for k in np.flatnonzero(c_to > 0.0)]
    mu_vec = c_to[b_keys]

    f = c_from.copy()
    g = np.zeros(K)
    segs = []

    def coefficients():
        return f + g

    def emit(c0, kind, events):
        c1 = coefficients()
        if not np.array_equal(c0, c1):
            segs.append((c0, c1, kind, events))

    budget = config.t6_budget_factor * max(K, 1)
    sum_trace = [float(f.sum())]
    for _ in range(budget):
        # Restore linear independence of the active tagged family. A key
        # carrying both departing and arriving mass contributes the same
        # column twice, so this also consolidates duplicated tags.
        for _ in range(2 * K + 2):
            tags = ([("a", int(k)) for k in np.flatnonzero(f > 0.0)]
                    + [("b", int(k)) for k in np.flatnonzero(g > 0.0)])
            if not tags:
                break
            cols = np.column_stack([Ghat[:, k] for _, k in tags])
            if _rank_of(cols, config) == len(tags):
                break
            _, _, Vt = np.linalg.svd(cols)
            eta = Vt[-1]
            sum_a = float(sum(eta[i] for i, (t, _) in enumerate(tags) if t == "a"))
            if sum_a < -1e-12 or (abs(sum_a) <= 1e-12 and eta.max() <= 1e-14):
                eta = -eta
            vals = np.array([f[k] if t == "a" else g[k] for t, k in tags])
            pos = eta > 1e-14
            if not pos.any():
                raise NoConvergence("pruning step found no decreasing coefficient")
            alpha = float(np.min(vals[pos] / eta[pos]))
            c0 = coefficients()
            for i, (t, k) in enumerate(tags):
                if t == "a":
                    f[k] -= alpha * eta[i]
                else:
                    g[k] -= alpha * eta[i]
            f = _snap_small(f, scale)
            g = _snap_small(g, scale)
            emit(c0, UPDATE2_PRUNE,
                 ((UPDATE2_PRUNE, "independence restored"),
                  (CARDINALITY_CHANGE, "support shrank")))

        act_a = [int(k) for k in np.flatnonzero(f > 0.0)]
        act_b = [int(k) for k in np.flatnonzero(g > 0.0)]
        if set(act_a) | set(act_b) <= set(b_keys):
            break
        tags = [("a", k) for k in act_a] + [("b", k) for k in act_b]
        C_mat = np.column_stack([Ghat[:, k] for _, k in tags])
        theta = np.array([f[k] for k in act_a] + [g[k] for k in act_b])
        mu_star_small = reduce_support(
            [C_mat[:, i] for i in range(C_mat.shape[1])],
            [Ghat[:, k] for k in b_keys],
            range(len(act_a)), theta, mu_vec, config)
        z = Ghat[:, b_keys] @ mu_star_small
        delta, *_ = np.linalg.lstsq(C_mat, z, rcond=None)
        lam_t = delta[:len(act_a)]
        mu_t = dict(zip(act_b, delta[len(act_a):]))
        mu_star = dict(zip(b_keys, mu_star_small))

        ratios = []
        for i, k in enumerate(act_a):
            if lam_t[i] > 1e-14:
                ratios.append(f[k] / lam_t[i])
        for k in act_b:
            dec = mu_t.get(k, 0.0) - mu_star.get(k, 0.0)
            if dec > 1e-14:
                ratios.append(g[k] / dec)
        if not ratios:
            raise NoConvergence("transfer step found no decreasing coefficient")
        step = min(ratios)
        c0 = coefficients()
        for i, k in enumerate(act_a):
            f[k] -= step * lam_t[i]
        for k in b_keys:
            g[k] += step * mu_star.get(k, 0.0)
        for k in act_b:
            g[k] -= step * mu_t.get(k, 0.0)
        f = _snap_small(f, scale)
        g = _snap_small(g, scale)
        emit(c0, UPDATE1, ((UPDATE1, "mass transfer toward target"),))

        new_sum = float(f.sum())
        if not new_sum < sum_trace[-1]:
            raise NoConvergence(
                f"departing mass stalled at {new_sum:.6g} "
                f"(trace {['%.4g' % s for s in sum_trace]})")
        sum_trace.append(new_sum)
    else:
        raise NoConvergence(
            f"no convergence within {budget} transfer iterations "
            f"(departing-mass trace {['%.4g' % s for s in sum_trace]})")

    final = coefficients()
    if float(np.abs(final - c_to).max(initial=0.0)) > 1e-8 * scale:
        raise NoConvergence("schedule terminated away from the target point")
    if segs:
        c0, _, kind, events = segs[-1]
        segs[-1] = (c0, c_to.copy(), kind, events)
    return segs


def _prune_coefficient_segments(polytope, coefficients, config, kind="prune"):
    """Linear segments of the support-pruning walk, plus its endpoint."""
    c_end, breakpoints = staircase.prune_to_irreducible(
        polytope, coefficients, config)
    segs = []
    for c0, c1 in zip(breakpoints[:-1], breakpoints[1:]):
        segs.append((c0, c1, kind, ((CARDINALITY_CHANGE, "support shrank"),)))
    return segs, c_end


# ---------------------------------------------------------------------------
# Lifting coefficient schedules to network space
# ---------------------------------------------------------------------------

class _Lifter:
    """Assigns generators to slots and lifts coefficient segments.

    Keeps (pattern, sign) mass in a stable slot for as long as it stays
    positive; a generator activating fresh takes the lowest free slot.
    The lifted skip term follows the coefficient point continuously,
    starting from the reference skip of the entry network.
    """

    def __init__(self, polytope, m, slot_of, skip_ref, c_ref, config):
        self.polytope = polytope
        self.dataset = polytope.dataset
        self.m = m
        self.slot_of = dict(slot_of)
        self.config = config
        self.G = polytope.generator_matrix
        self.dirs = [gen.direction for gen in polytope.generators]
        self.signs = [1.0 if gen.side == "u" else -1.0 for gen in polytope.generators]
        self.skip_ref = None if skip_ref is None else np.asarray(skip_ref, float)
        if polytope.has_skip:
            Xe = self.dataset.effective_design
            self.pinv = np.linalg.pinv(Xe)
            self.fit_ref = self.G @ np.asarray(c_ref, dtype=float)
            if self.skip_ref is None:
                self.skip_ref = np.zeros(self.dataset.d_eff)
        else:
            self.pinv = None

    def skip_at(self, c):
        if not self.polytope.has_skip:
            return None
        return self.skip_ref + self.pinv @ (self.fit_ref - self.G @ c)

    def params_at(self, c, assign):
        W = np.zeros((self.m, self.dataset.d_eff))
        a = np.zeros(self.m)
        for k, slot in assign.items():
            ck = float(c[k])
            if ck <= 0.0:
                continue
            r = math.sqrt(ck)
            W[slot] = self.dirs[k] * r
            a[slot] = self.signs[k] * r
        return NetworkParams(W, a, self.skip_at(c))

    def lift(self, coeff_segs):
        segs = []
        for c0, c1, kind, events in coeff_segs:
            sup0 = set(int(k) for k in np.flatnonzero(c0 > 0.0))
            sup1 = set(int(k) for k in np.flatnonzero(c1 > 0.0))
            for k in sorted(sup0 | sup1):
                if k in self.slot_of:
                    continue
                used = set(self.slot_of.values())
                free = [s for s in range(self.m) if s not in used]
                if not free:
                    raise NotConnected(
                        f"width {self.m} has no free slot for an activating "
                        "generator; the widths are too small for this route")
                self.slot_of[k] = free[0]
            assign = {k: self.slot_of[k] for k in sorted(sup0 | sup1)}
            start = self.params_at(c0, assign)
            end = self.params_at(c1, assign)
            start_events = list(events)
            end_events = []
            if sup1 - sup0:
                start_events.append(
                    (CARDINALITY_CHANGE, f"{len(sup1 - sup0)} generator(s) activating"))
            dying = sup0 - sup1
            if dying:
                end_events.append(
                    (CARDINALITY_CHANGE, f"{len(dying)} generator(s) retired"))
            formula = (lambda s, c0=c0, c1=c1, assign=assign:
                       self.params_at((1.0 - s) * c0 + s * c1, assign))
            segs.append(_Seg(kind, start, end, formula,
                             events=tuple(start_events),
                             end_events=tuple(end_events)))
            for k in dying:
                del self.slot_of[k]
        return segs


def _slot_assignment(params: NetworkParams, dataset: Dataset,
                     basis: PatternBasis, polytope: OptimalPolytope,
                     config: Config) -> dict:
    """Map generator key -> slot for a minimal network's active neurons."""
    scale = 1.0 + float(np.abs(polytope.y_star).max(initial=0.0))
    mass_tol = 1e-5 * scale
    assign = {}
    for j in range(params.width):
        alpha = float(params.amplitudes[j])
        w = params.weights[j]
        mass = float(np.linalg.norm(w)) * abs(alpha)
        if mass <= mass_tol:
            continue
        idx = _canonical_pattern_index(w, dataset, basis)
        side = "u" if alpha > 0 else "v"
        try:
            key = polytope.key_of(idx, side)
        except KeyError:
            raise NotOptimal(
                f"neuron {j} carries mass on an inactive pattern/sign pair") from None
        if key in assign:
            raise PreconditionViolated(
                "two neurons share a pattern and sign; merge them first")
        assign[key] = j
    return assign


# ---------------------------------------------------------------------------
# The master connector
# ---------------------------------------------------------------------------

def _lerp_segment(a: NetworkParams, b: NetworkParams, kind="seam") -> _Seg | None:
    """Straight-line segment between two parameter tuples, or None if equal.

    Used for the seams of the master route: reconciling a coefficient
    reconstruction with the actual endpoint arrays (a few float ulps) and
    moving the unregularized skip term inside its feasible affine slice.
    """
    if params_equal(a, b):
        return None

    def formula(s, a=a, b=b):
        skip = None
        if a.skip is not None and b.skip is not None:
            skip = (1.0 - s) * a.skip + s * b.skip
        return NetworkParams((1.0 - s) * a.weights + s * b.weights,
                             (1.0 - s) * a.amplitudes + s * b.amplitudes,
                             skip)

    return _Seg(kind, a.copy(), b.copy(), formula)


def connect(theta_A: NetworkParams, theta_B: NetworkParams, dataset: Dataset,
            strategy: str = AUTO, config: Config = DEFAULTS,
            polytope: OptimalPolytope | None = None) -> ParameterPath:
    """Continuous optimal path between two optimal networks of equal width.

    The route merges both endpoints to minimal networks, walks their
    coefficient points through the optimal set (direct interpolation via
    a minimum-support point, or the bounded-support transfer schedule
    when the width allows n+1 active terms), aligns slots with a
    permutation bridge, and replays the far endpoint's merge in reverse.
    Every sample is optimal within the path tolerance; endpoints are
    reproduced exactly.

    Raises NotOptimal when an endpoint fails the optimality check and
    NotConnected when the requested width cannot carry any known route.
    """
    if theta_A.width != theta_B.width:
        raise ShapeMismatch(
            f"widths differ: {theta_A.width} vs {theta_B.width}")
    if strategy not in (SUM_WIDTHS, N_PLUS_ONE, AUTO):
        raise ShapeMismatch(f"unknown strategy {strategy!r}")
    m = theta_A.width
    if params_equal(theta_A, theta_B):
        return _constant_path(theta_A, config)
    if polytope is None:
        basis = arrangement.enumerate_patterns(dataset, config)
        polytope = dual_polytope.build_polytope(dataset, basis, config)
    basis = polytope.basis

    # Optimality gate for both endpoints.
    dual_polytope.decompose(polytope, phi(theta_A, dataset, basis, config), config)
    dual_polytope.decompose(polytope, phi(theta_B, dataset, basis, config), config)

    merge_A, A_min = _merge_segments(theta_A, dataset, basis, config)
    merge_B, B_min = _merge_segments(theta_B, dataset, basis, config)
    c_A = dual_polytope.decompose(polytope, phi(A_min, dataset, basis, config), config)
    c_B = dual_polytope.decompose(polytope, phi(B_min, dataset, basis, config), config)

    n = dataset.n
    if strategy == AUTO:
        # The bounded-support transfer works whenever n+1 terms fit; the
        # direct interpolation route is attempted otherwise and reports
        # NotConnected when some leg needs more slots than the width.
        strategy = N_PLUS_ONE if m >= n + 1 else SUM_WIDTHS
    elif strategy == N_PLUS_ONE and m < n + 1:
        raise PreconditionViolated(
            f"the bounded-support schedule needs width at least {n + 1}, got {m}")

    prune_A, a_irr = _prune_coefficient_segments(polytope, c_A, config)
    prune_B, b_irr = _prune_coefficient_segments(polytope, c_B, config)

    coeff_segs = list(prune_A)
    if strategy == N_PLUS_ONE:
        coeff_segs += _width_n_plus_one_schedule(polytope, a_irr, b_irr, config)
    else:
        if len(polytope.generators):
            c_mid = staircase.minimal_support_point(polytope, config)
        else:
            c_mid = np.zeros(0)
        for c0, c1 in ((a_irr, c_mid), (c_mid, b_irr)):
            if np.array_equal(c0, c1):
                continue
            union = int(np.count_nonzero((c0 > 0.0) | (c1 > 0.0)))
            if union > m:
                raise NotConnected(
                    f"interpolating through the minimum-support point needs "
                    f"{union} simultaneous neurons but the width is {m}")
            coeff_segs.append((c0, c1, "interpolate", ()))
    coeff_segs += [(c1, c0, kind + "-reversed",
                    ((CARDINALITY_CHANGE, "support grew"),))
                   for c0, c1, kind, _ in reversed(prune_B)]

    slots_A = _slot_assignment(A_min, dataset, basis, polytope, config)
    lifter = _Lifter(polytope, m, slots_A, A_min.skip, c_A, config)
    lifted = lifter.lift(coeff_segs)

    head = []
    if lifted:
        seam_in = _lerp_segment(A_min, lifted[0].start)
        if seam_in is not None:
            head.append(seam_in)

    # Align slots with the far endpoint's arrangement.
    slots_B = _slot_assignment(B_min, dataset, basis, polytope, config)
    cur = dict(lifter.slot_of)
    sigma = [-1] * m
    for key, tgt in slots_B.items():
        if key not in cur:
            raise NoConvergence(
                "the coefficient path ended off the far endpoint's support")
        sigma[tgt] = cur[key]
    free_targets = [j for j in range(m) if sigma[j] < 0]
    used_sources = set(s for s in sigma if s >= 0)
    free_sources = [s for s in range(m) if s not in used_sources]
    for tgt, src in zip(free_targets, free_sources):
        sigma[tgt] = src
    seam = lifted[-1].end if lifted else A_min
    bridge = []
    if sigma != list(range(m)):
        bridge, seam = _realize_permutation(seam, sigma, config)

    # Reconcile the reconstructed seam with the actual far endpoint (a few
    # ulps on the weights, plus any skip difference inside the null space
    # of the design, along which the fit is constant).
    tail = []
    seam_out = _lerp_segment(seam, B_min)
    if seam_out is not None:
        tail.append(seam_out)
    tail += [seg.reversed() for seg in reversed(merge_B)]

    segs = merge_A + head + lifted + bridge + tail
    if not segs:
        return _constant_path(theta_A, config)
    return _assemble(segs, config, min_total=config.min_path_samples)


# ---------------------------------------------------------------------------
# Path verification
# ---------------------------------------------------------------------------

def verify_path(path: ParameterPath, dataset: Dataset, opt_value: float,
                config: Config = DEFAULTS) -> PathVerification:
    """Numerically certify a path against the optimal value.

    Reports the worst objective deviation, the worst interpolation
    violation (zero in regression mode), and the largest jump between
    adjacent samples. The path passes when all three stay within the
    configured tolerances.
    """
    if not path.samples:
        raise PreconditionViolated("cannot verify an empty path")
    scale = 1.0 + float(np.abs(dataset.y).max(initial=0.0))
    max_dev = 0.0
    max_feas = 0.0
    max_jump = 0.0
    prev = None
    for _, params in path.samples:
        max_dev = max(max_dev, abs(network_objective(params, dataset) - opt_value))
        if dataset.mode != MODE_REGRESSION:
            miss = float(np.abs(network_fit(params, dataset) - dataset.y).max(initial=0.0))
            max_feas = max(max_feas, miss)
        if prev is not None:
            max_jump = max(max_jump, _params_distance(prev, params))
        prev = params
    passed = (max_dev <= config.tol_path
              and max_feas <= config.tol_feas * scale
              and max_jump <= config.lipschitz_cap)
    return PathVerification(
        passed=passed,
        max_objective_deviation=max_dev,
        max_feasibility_violation=max_feas,
        max_jump=max_jump,
        sample_count=len(path.samples),
        opt_value=float(opt_value),
    )
