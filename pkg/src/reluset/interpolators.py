"""Non-uniqueness example datasets and families of equally optimal networks.

Three kinds of objects live here. First, a generator for the planted
family of datasets whose dual problem has n+1 maximizers, which is the
engine behind every "infinitely many optimal interpolators" instance.
Second, a small registry of built-in example datasets (two minimum-width
counterexamples with skip connections, two one-dimensional families, and
the three-generator warm-up), each carrying exact reference networks.
Third, ``optimal_interpolator_family``, which parametrizes the entire
coefficient polytope of a dataset as affine segments c(t) so individual
optimal networks can be sampled, compared, and exported.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize as sp_optimize

from .arrangement import (
    Dataset,
    MODE_INTERPOLATION,
    MODE_REGRESSION,
    enumerate_patterns,
    nnls_linear,
    relu,
)
from .config import Config, DEFAULTS
from .convex_core import skip_basis
from .dual_polytope import OptimalPolytope, build_polytope
from .errors import (
    InvalidGeometry,
    NoConvergence,
    PreconditionViolated,
    ShapeMismatch,
)
from .transport import NetworkParams, psi

ANGLES = "angles"

ARCH_SKIP_BIAS = "SB"
ARCH_BIAS_ONLY = "NSB"
ARCH_SKIP_ONLY = "SNB"
ARCH_PLAIN = "NSNB"

BUILTIN_NAMES = ("ce1", "ce2", "appendixH", "example1", "example2")

_PREMISE_TOL = 1e-12

__all__ = [
    "ANGLES",
    "ARCH_BIAS_ONLY",
    "ARCH_PLAIN",
    "ARCH_SKIP_BIAS",
    "ARCH_SKIP_ONLY",
    "BUILTIN_NAMES",
    "BuiltinExample",
    "FamilySegment",
    "InterpolatorFamily",
    "NonuniqueClass",
    "architecture_tag",
    "builtin_example",
    "default_probe_grid",
    "eval_model",
    "generate_nonunique_class",
    "optimal_interpolator_family",
]


def architecture_tag(dataset: Dataset) -> str:
    """Classify the dataset's architecture by its skip and bias flags."""
    if dataset.has_skip:
        return ARCH_SKIP_BIAS if dataset.has_bias else ARCH_SKIP_ONLY
    return ARCH_BIAS_ONLY if dataset.has_bias else ARCH_PLAIN


# ---------------------------------------------------------------------------
# Family containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilySegment:
    """One affine piece c(t) = origin + t * rate of a coefficient family."""

    t_lo: float
    t_hi: float
    origin: np.ndarray
    rate: np.ndarray

    def coefficients_at(self, t: float) -> np.ndarray:
        """Coefficient vector at parameter ``t`` (must lie in the range)."""
        if not (self.t_lo - 1e-12 <= t <= self.t_hi + 1e-12):
            raise PreconditionViolated(
                f"t={t!r} outside the segment range [{self.t_lo}, {self.t_hi}]")
        c = self.origin + float(t) * self.rate
        # deep inside the interval the formula is positive; clear rounding dust
        return np.where(np.abs(c) <= 1e-14 * max(1.0, float(np.max(np.abs(c), initial=0.0))), 0.0, c)


@dataclass(frozen=True)
class InterpolatorFamily:
    """All optimal networks of one dataset, as coefficient segments.

    ``segments`` parametrize the coefficient polytope: a single point
    (dimension 0), a full segment with two endpoint vertices (dimension
    1), or one box-clipped segment per affine-basis direction through a
    relative-interior point (dimension 2 and up). Every sampled member
    reproduces the optimal fit exactly and shares ``objective``.
    """

    polytope: OptimalPolytope
    segments: tuple
    objective: float
    architecture: str
    dimension: int
    basis: np.ndarray
    vertices: tuple = ()

    @property
    def t_lo(self) -> float:
        return self.segments[0].t_lo

    @property
    def t_hi(self) -> float:
        return self.segments[0].t_hi

    def coefficients_at(self, t: float, segment: int = 0) -> np.ndarray:
        """Coefficients at parameter ``t`` on the chosen segment."""
        return self.segments[segment].coefficients_at(t)

    def member_at(self, t: float, m: int | None = None, segment: int = 0,
                  config: Config = DEFAULTS) -> NetworkParams:
        """Lift the coefficient point at ``t`` to an explicit network."""
        c = self.coefficients_at(t, segment=segment)
        width = m if m is not None else max(int(np.count_nonzero(c > 0.0)), 1)
        return psi(c, self.polytope, width, config)

    def endpoint_coefficients(self) -> list:
        """Endpoint coefficient vectors of every segment, in order."""
        out = []
        for seg in self.segments:
            out.append(seg.coefficients_at(seg.t_lo))
            if seg.t_hi > seg.t_lo:
                out.append(seg.coefficients_at(seg.t_hi))
        return out


# ---------------------------------------------------------------------------
# Planted non-uniqueness class
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NonuniqueClass:
    """A planted dataset whose dual problem has n+1 maximizers.

    ``directions`` holds the n+1 optimal first-layer directions (rows:
    the partial sums s_1..s_n, then s_n - v_n) and ``dual_vector`` the
    predicted dual multiplier, one entry per data point in row order.
    The optimal value of the minimum-norm interpolation equals
    ``optimal_value`` = sum of the conic weights.
    """

    dataset: Dataset
    directions: np.ndarray
    dual_vector: np.ndarray
    v_vectors: np.ndarray
    weights: np.ndarray
    optimal_value: float


def _equally_spaced_v(n: int) -> np.ndarray:
    """Increment vectors whose partial sums sweep 30 to 90 degrees."""
    thetas = np.pi / 6.0 + (np.pi / 3.0) * np.arange(n) / (n - 1)
    s = np.column_stack([np.cos(thetas), np.sin(thetas)])
    v = np.empty((n, 2))
    v[n - 1] = s[0]
    for k in range(1, n):
        v[n - 1 - k] = s[k] - s[k - 1]
    return v


def generate_nonunique_class(n: int, v_vectors=ANGLES, weights=None,
                             beta: float = 1.0) -> NonuniqueClass:
    """Build a one-dimensional dataset with a continuum of optimal networks.

    Parameters
    ----------
    n : int
        Number of data points (at least 2).
    v_vectors : array or str
        Either an (n, 2) array of increment vectors satisfying the
        construction premises, or :data:`ANGLES` for the equally spaced
        instance whose partial sums sit at angles 30, ..., 90 degrees.
    weights : array, optional
        Nonnegative conic weights (length n+1, not all zero) combining
        the optimal features into the labels. Defaults to all ones;
        strictly positive weights guarantee the planted family is the
        entire optimal set.
    beta : float
        Stored regularization constant (interpolation mode fixes the
        effective value at 1).

    Raises
    ------
    InvalidGeometry
        Naming the first violated premise on the increment vectors.
    """
    if int(n) != n or n < 2:
        raise InvalidGeometry(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    if isinstance(v_vectors, str):
        if v_vectors.lower() != ANGLES:
            raise PreconditionViolated(
                f"unknown v_vectors spec {v_vectors!r}; expected {ANGLES!r} "
                "or an (n, 2) array")
        v = _equally_spaced_v(n)
    else:
        v = np.asarray(v_vectors, dtype=float)
        if v.shape != (n, 2):
            raise ShapeMismatch(
                f"v_vectors must have shape ({n}, 2), got {v.shape}")

    v_last_target = np.array([math.sqrt(3.0) / 2.0, 0.5])
    if np.max(np.abs(v[n - 1] - v_last_target)) > _PREMISE_TOL:
        raise InvalidGeometry(
            "premise violated: v_n must equal (sqrt(3)/2, 1/2), got "
            f"{tuple(v[n - 1])}")
    s = np.cumsum(v[::-1], axis=0)
    for k in range(n - 1):
        if abs(float(np.hypot(s[k, 0], s[k, 1])) - 1.0) > _PREMISE_TOL:
            raise InvalidGeometry(
                f"premise violated: partial sum s_{k + 1} is not unit-norm")
        if np.min(s[k]) <= _PREMISE_TOL:
            raise InvalidGeometry(
                f"premise violated: partial sum s_{k + 1} is not "
                "componentwise positive")
    if np.max(np.abs(s[n - 1] - np.array([0.0, 1.0]))) > _PREMISE_TOL:
        raise InvalidGeometry(
            f"premise violated: s_n must equal (0, 1), got {tuple(s[n - 1])}")
    if np.min(v[:, 1]) <= _PREMISE_TOL:
        bad = int(np.argmin(v[:, 1])) + 1
        raise InvalidGeometry(
            f"premise violated: v_{bad} has a nonpositive second component")

    if weights is None:
        w = np.ones(n + 1)
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.shape[0] != n + 1:
            raise ShapeMismatch(
                f"weights must have length {n + 1}, got {w.shape[0]}")
        if np.min(w) < 0.0:
            raise PreconditionViolated("conic weights must be nonnegative")
        if not np.sum(w) > 0.0:
            raise PreconditionViolated("conic weights must not all be zero")

    x = v[:, 0] / v[:, 1]
    directions = np.vstack([s, (s[n - 1] - v[n - 1])[None, :]])
    design = np.column_stack([x, np.ones(n)])
    features = relu(design @ directions.T)
    y = features @ w
    dataset = Dataset(X=x[:, None], y=y, beta=beta, mode=MODE_INTERPOLATION,
                      has_bias=True, has_skip=False)
    return NonuniqueClass(dataset=dataset, directions=directions,
                          dual_vector=v[:, 1].copy(), v_vectors=v,
                          weights=w, optimal_value=float(np.sum(w)))


# ---------------------------------------------------------------------------
# Built-in examples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BuiltinExample:
    """A named example dataset with exact reference networks.

    ``dual_vector`` is the hand-derivable dual witness in the convention
    where active features satisfy nu.(Xu)+ = +-beta; the certificate the
    polytope builder stores uses the opposite sign.
    """

    name: str
    dataset: Dataset
    architecture: str
    reference_models: tuple
    expected_objective: float
    dual_vector: np.ndarray
    summary: str


def _builtin_example1() -> BuiltinExample:
    s3 = math.sqrt(3.0)
    dataset = Dataset(X=np.array([[-s3], [s3]]), y=np.array([1.0, 1.0]),
                      beta=0.1, mode=MODE_REGRESSION,
                      has_bias=True, has_skip=False)
    r = math.sqrt(0.95)
    single = NetworkParams(np.array([[0.0, r]]), np.array([r]))
    q = math.sqrt(0.475)
    double = NetworkParams(
        np.array([[s3 / 2.0 * q, 0.5 * q], [-s3 / 2.0 * q, 0.5 * q]]),
        np.array([q, q]))
    return BuiltinExample(
        name="example1", dataset=dataset, architecture=ARCH_BIAS_ONLY,
        reference_models=(single, double),
        expected_objective=0.0975,
        dual_vector=np.array([0.05, 0.05]),
        summary="two-point regression whose optimum is a segment between "
                "a width-1 and a width-2 network")


def _builtin_example2() -> BuiltinExample:
    x = np.array([
        math.tan(math.pi / 3.0),
        -math.tan(5.0 * math.pi / 24.0),
        -math.tan(7.0 * math.pi / 24.0),
        -math.tan(9.0 * math.pi / 24.0),
        -math.tan(11.0 * math.pi / 24.0),
    ])
    angles = np.pi / 6.0 + (np.pi / 3.0) * np.arange(5) / 4.0
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    design = np.column_stack([x, np.ones(5)])
    y = 20.0 * (relu(design @ dirs[0]) + relu(design @ dirs[2])
                + relu(design @ dirs[4]))
    dataset = Dataset(X=x[:, None], y=y, beta=1.0, mode=MODE_INTERPOLATION,
                      has_bias=True, has_skip=False)
    r20 = math.sqrt(20.0)
    teacher = NetworkParams(r20 * dirs[[0, 2, 4]], np.array([r20, r20, r20]))
    sines = np.sin(angles)
    dual = np.array([0.5, sines[1] - sines[0], sines[2] - sines[1],
                     sines[3] - sines[2], 1.0 - sines[3]])
    return BuiltinExample(
        name="example2", dataset=dataset, architecture=ARCH_BIAS_ONLY,
        reference_models=(teacher,),
        expected_objective=60.0,
        dual_vector=dual,
        summary="five-point planted instance whose optimal set is a "
                "segment of cost-60 interpolators")


def _builtin_appendix_h() -> BuiltinExample:
    s3 = math.sqrt(3.0)
    dataset = Dataset(X=np.array([[-s3], [s3]]), y=np.array([0.5, 1.5]),
                      beta=1.0, mode=MODE_INTERPOLATION,
                      has_bias=True, has_skip=False)
    h = math.sqrt(0.5)
    model_a = NetworkParams(
        np.array([[s3 / 2.0 * h, 0.5 * h], [0.0, h]]), np.array([h, h]))
    q = math.sqrt(0.75)
    model_b = NetworkParams(
        np.array([[s3 / 2.0 * q, 0.5 * q], [-s3 / 4.0, 0.25]]),
        np.array([q, 0.5]))
    return BuiltinExample(
        name="appendixH", dataset=dataset, architecture=ARCH_BIAS_ONLY,
        reference_models=(model_a, model_b),
        expected_objective=1.0,
        dual_vector=np.array([0.5, 0.5]),
        summary="two-point interpolation with two distinct smallest "
                "networks of width 2")


def _builtin_ce1() -> BuiltinExample:
    s3 = math.sqrt(3.0)
    dataset = Dataset(
        X=np.array([[1.0, 0.0], [-0.5, s3 / 2.0], [-0.5, -s3 / 2.0]]),
        y=np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]),
        beta=1.0, mode=MODE_INTERPOLATION, has_bias=False, has_skip=True)
    h = math.sqrt(0.5)
    model_a = NetworkParams(
        np.array([[h, 0.0], [-0.5 * h, s3 / 2.0 * h]]),
        np.array([h, h]),
        skip=np.array([-1.0 / 3.0, 0.0]))
    model_b = NetworkParams(
        np.array([[-0.5 * h, -s3 / 2.0 * h], [-0.5 * h, s3 / 2.0 * h]]),
        np.array([h, h]),
        skip=np.array([1.0 / 6.0, s3 / 6.0]))
    return BuiltinExample(
        name="ce1", dataset=dataset, architecture=ARCH_SKIP_ONLY,
        reference_models=(model_a, model_b),
        expected_objective=1.0,
        dual_vector=np.array([1.0, 1.0, 1.0]),
        summary="three points on the circle with two width-2 optimal "
                "networks under a skip connection")


def _builtin_ce2() -> BuiltinExample:
    dataset = Dataset(
        X=np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]),
        y=np.array([1.0, -1.0, 1.0, -1.0]),
        beta=1.0, mode=MODE_INTERPOLATION, has_bias=True, has_skip=True)
    r2 = math.sqrt(2.0)
    model_a = NetworkParams(
        np.array([[0.0, r2, 0.0], [0.0, -r2, 0.0]]),
        np.array([-r2, -r2]),
        skip=np.array([0.0, 0.0, 1.0]))
    model_b = NetworkParams(
        np.array([[r2, 0.0, 0.0], [-r2, 0.0, 0.0]]),
        np.array([r2, r2]),
        skip=np.array([0.0, 0.0, -1.0]))
    return BuiltinExample(
        name="ce2", dataset=dataset, architecture=ARCH_SKIP_BIAS,
        reference_models=(model_a, model_b),
        expected_objective=4.0,
        dual_vector=np.array([1.0, -1.0, 1.0, -1.0]),
        summary="four axis points realized by both an axis-aligned ridge "
                "in x and one in y, each of cost 4")


_BUILTIN_FACTORIES = {
    "ce1": _builtin_ce1,
    "ce2": _builtin_ce2,
    "appendixH": _builtin_appendix_h,
    "example1": _builtin_example1,
    "example2": _builtin_example2,
}


def builtin_example(name: str) -> BuiltinExample:
    """Return the named built-in example dataset."""
    try:
        factory = _BUILTIN_FACTORIES[name]
    except KeyError:
        raise PreconditionViolated(
            f"unknown example {name!r}; available: {', '.join(BUILTIN_NAMES)}")
    return factory()


# ---------------------------------------------------------------------------
# Family construction
# ---------------------------------------------------------------------------


def _projected_system(polytope: OptimalPolytope):
    """Generator matrix and target with the skip span projected out."""
    G = polytope.generator_matrix
    y_star = polytope.y_star
    dataset = polytope.dataset
    if polytope.has_skip:
        Q = skip_basis(dataset)
        if Q is not None and Q.size:
            G = G - Q @ (Q.T @ G)
            y_star = y_star - Q @ (Q.T @ y_star)
    return G, y_star


def _coordinate_maximizers(Gp: np.ndarray, yp: np.ndarray, scale: float):
    """Per-coordinate maxima over {c >= 0 : Gp c = yp} and their witnesses."""
    K = Gp.shape[1]
    support = []
    witnesses = []
    for k in range(K):
        cost = np.zeros(K)
        cost[k] = -1.0
        res = sp_optimize.linprog(cost, A_eq=Gp, b_eq=yp,
                                  bounds=(0.0, None), method="highs")
        if res.status != 0 or res.x is None:
            raise NoConvergence(
                f"coefficient-polytope probe for generator {k} failed: "
                f"{res.message}")
        if res.x[k] > 1e-9 * scale:
            support.append(k)
            witnesses.append(np.maximum(res.x, 0.0))
    return support, witnesses


def _box_interval(c: np.ndarray, eta: np.ndarray, scale: float):
    """Largest [t_lo, t_hi] with c + t * eta >= 0 (0 in the interval)."""
    tol = 1e-13 * max(1.0, float(np.max(np.abs(eta))))
    up = np.inf
    down = np.inf
    for ck, ek in zip(c, eta):
        if ek < -tol:
            up = min(up, ck / -ek)
        elif ek > tol:
            down = min(down, ck / ek)
    if not (np.isfinite(up) and np.isfinite(down)):
        raise NoConvergence(
            "coefficient family direction is unbounded; the generator set "
            "cannot all be active")
    return -down, up


def _snap_zeros(c: np.ndarray, scale: float) -> np.ndarray:
    out = np.asarray(c, dtype=float).copy()
    out[np.abs(out) <= 1e-11 * scale] = 0.0
    if np.min(out, initial=0.0) < 0.0:
        raise NoConvergence("family endpoint left the nonnegative cone")
    return out


def _exact_endpoint(c_raw: np.ndarray, Gp: np.ndarray, yp: np.ndarray,
                    scale: float) -> np.ndarray:
    """Refit an endpoint on its own support for exact arrays."""
    c = _snap_zeros(c_raw, scale)
    support = np.flatnonzero(c > 0.0)
    if support.size == 0:
        return c
    sol, *_ = np.linalg.lstsq(Gp[:, support], yp, rcond=None)
    if np.min(sol) < -1e-10 * scale:
        return c
    refined = np.zeros_like(c)
    refined[support] = np.maximum(sol, 0.0)
    if np.max(np.abs(Gp @ refined - yp)) > 1e-9 * scale:
        return c
    if np.max(np.abs(refined - c)) > 1e-6 * scale:
        return c
    return refined


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    for x, z in zip(a, b):
        if x != z:
            return x < z
    return False


def _enumerate_vertices(Gp, yp, support, rank, scale, config):
    """Basic feasible coefficient points on the maximal support."""
    if rank == 0:
        return (np.zeros(Gp.shape[1]),)
    if math.comb(len(support), rank) > 200000:
        return ()
    seen = {}
    for combo in itertools.combinations(support, rank):
        cols = Gp[:, list(combo)]
        sv = np.linalg.svd(cols, compute_uv=False)
        if sv[-1] <= config.rank_tol * max(sv[0], 1.0):
            continue
        sol, *_ = np.linalg.lstsq(cols, yp, rcond=None)
        if np.min(sol) < -1e-10 * scale:
            continue
        cand = np.zeros(Gp.shape[1])
        cand[list(combo)] = np.maximum(sol, 0.0)
        if np.max(np.abs(Gp @ cand - yp)) > 1e-8 * scale:
            continue
        key = tuple(np.round(cand / max(scale, 1e-30), 9))
        seen.setdefault(key, cand)
    verts = sorted(seen.values(), key=lambda c: tuple(c))
    return tuple(verts)


def optimal_interpolator_family(dataset: Dataset, config: Config = DEFAULTS,
                                polytope: OptimalPolytope | None = None
                                ) -> InterpolatorFamily:
    """Parametrize every optimal network of the dataset.

    The coefficient polytope {c >= 0 : sum c_k g_k matches the optimal
    fit modulo the skip span} is probed coordinate by coordinate to find
    its maximal support, then described exactly: a singleton, a segment
    with refitted endpoint arrays, or (dimension >= 2) an affine basis
    with one clipped segment per direction through a relative-interior
    point, plus enumerated vertices up to the configured dimension cap.
    """
    if polytope is None:
        basis = enumerate_patterns(dataset, config)
        polytope = build_polytope(dataset, basis, config)
    arch = architecture_tag(dataset)
    objective = float(polytope.optimal_value)
    Gp, yp = _projected_system(polytope)
    K = Gp.shape[1]
    scale = max(1.0, float(np.max(np.abs(yp), initial=0.0)),
                float(np.max(np.abs(Gp), initial=0.0)))

    if K == 0 or np.max(np.abs(yp), initial=0.0) <= 1e-12 * scale:
        point = np.zeros(K)
        seg = FamilySegment(0.0, 0.0, point, np.zeros(K))
        return InterpolatorFamily(
            polytope=polytope, segments=(seg,), objective=objective,
            architecture=arch, dimension=0, basis=np.zeros((0, K)),
            vertices=(point,))

    support, witnesses = _coordinate_maximizers(Gp, yp, scale)
    if not support:
        raise NoConvergence(
            "no generator carries positive mass, yet the target is nonzero")
    feas = nnls_linear(Gp, yp)
    if np.max(np.abs(Gp @ feas - yp)) <= 1e-7 * scale:
        witnesses.append(feas)
    interior = np.mean(witnesses, axis=0)
    interior[np.setdiff1d(np.arange(K), support)] = 0.0
    corr, *_ = np.linalg.lstsq(Gp[:, support],
                               yp - Gp[:, support] @ interior[support],
                               rcond=None)
    interior[support] += corr
    if np.min(interior[support]) <= 0.0:
        raise NoConvergence(
            "failed to locate a relative-interior coefficient point")

    GS = Gp[:, support]
    sv = np.linalg.svd(GS, compute_uv=False)
    rank = int(np.sum(sv > config.rank_tol * max(sv[0], 1.0)))
    dim = len(support) - rank
    _, _, Vt = np.linalg.svd(GS)
    null_rows = Vt[rank:]
    basis_full = np.zeros((dim, K))
    basis_full[:, support] = null_rows

    if dim == 0:
        point = _exact_endpoint(interior, Gp, yp, scale)
        seg = FamilySegment(0.0, 0.0, point, np.zeros(K))
        family = InterpolatorFamily(
            polytope=polytope, segments=(seg,), objective=objective,
            architecture=arch, dimension=0, basis=basis_full,
            vertices=(point,))
    elif dim == 1:
        eta = basis_full[0]
        t_lo, t_hi = _box_interval(interior, eta, scale)
        end_a = _exact_endpoint(interior + t_lo * eta, Gp, yp, scale)
        end_b = _exact_endpoint(interior + t_hi * eta, Gp, yp, scale)
        if _lex_less(end_b, end_a):
            end_a, end_b = end_b, end_a
        delta = end_b - end_a
        anchor = None
        for k in range(K):
            if end_a[k] == 0.0 and delta[k] > 1e-12 * max(1.0, float(np.max(np.abs(delta)))):
                anchor = k
                break
        if anchor is None:
            anchor = int(np.argmax(np.abs(delta)))
            if delta[anchor] < 0.0:
                end_a, end_b = end_b, end_a
                delta = -delta
        rate = delta / delta[anchor]
        seg = FamilySegment(0.0, float(delta[anchor]), end_a, rate)
        family = InterpolatorFamily(
            polytope=polytope, segments=(seg,), objective=objective,
            architecture=arch, dimension=1, basis=basis_full,
            vertices=(end_a, end_b))
    else:
        segs = []
        for row in basis_full:
            t_lo, t_hi = _box_interval(interior, row, scale)
            segs.append(FamilySegment(float(t_lo), float(t_hi),
                                      interior.copy(), row.copy()))
        vertices = ()
        if dim <= config.vertex_dim_cap or math.comb(len(support), rank) <= 4096:
            vertices = _enumerate_vertices(Gp, yp, support, rank, scale,
                                           config)
        family = InterpolatorFamily(
            polytope=polytope, segments=tuple(segs), objective=objective,
            architecture=arch, dimension=dim, basis=basis_full,
            vertices=vertices)

    for c in family.endpoint_coefficients():
        if np.min(c) < 0.0:
            raise NoConvergence("family endpoint left the nonnegative cone")
        if np.max(np.abs(Gp @ c - yp)) > 1e-8 * scale:
            raise NoConvergence(
                "family endpoint fails to reproduce the optimal fit")
    return family


# ---------------------------------------------------------------------------
# Forward evaluation
# ---------------------------------------------------------------------------


def _probe_matrix(probes) -> np.ndarray:
    P = np.asarray(probes, dtype=float)
    if P.ndim == 0:
        P = P.reshape(1, 1)
    elif P.ndim == 1:
        P = P[:, None]
    elif P.ndim != 2:
        raise ShapeMismatch(f"probes must be at most 2-d, got shape {P.shape}")
    return P


def eval_model(model, probes, dataset: Dataset | None = None,
               config: Config = DEFAULTS) -> np.ndarray:
    """Evaluate a network on probe inputs.

    ``model`` is either a :class:`NetworkParams` or a pair
    ``(family, t)`` naming a member of an :class:`InterpolatorFamily`
    (lifted on the fly). A 1-d probe array is read as scalar inputs;
    2-d arrays are (points, input dimension). When the network's weight
    rows have one more column than the probes, a constant 1 is appended
    (the bias convention of the datasets here).
    """
    if isinstance(model, (tuple, list)) and len(model) == 2 \
            and isinstance(model[0], InterpolatorFamily):
        family, t = model
        model = family.member_at(float(t), config=config)
        if dataset is None:
            dataset = family.polytope.dataset
    if not isinstance(model, NetworkParams):
        raise ShapeMismatch(
            "model must be NetworkParams or (InterpolatorFamily, t), got "
            f"{type(model).__name__}")
    P = _probe_matrix(probes)
    q = model.weights.shape[1]
    if dataset is not None and P.shape[1] != dataset.X.shape[1]:
        raise ShapeMismatch(
            f"probes have {P.shape[1]} columns, dataset inputs have "
            f"{dataset.X.shape[1]}")
    if q == P.shape[1]:
        Pe = P
    elif q == P.shape[1] + 1:
        Pe = np.column_stack([P, np.ones(P.shape[0])])
    else:
        raise ShapeMismatch(
            f"weights have {q} columns, probes have {P.shape[1]}")
    out = relu(Pe @ model.weights.T) @ model.amplitudes
    if model.skip is not None:
        if model.skip.shape[0] != q:
            raise ShapeMismatch(
                f"skip has {model.skip.shape[0]} entries, weights have {q} "
                "columns")
        out = out + Pe @ model.skip
    return out


def default_probe_grid(dataset: Dataset, points: int = 21) -> np.ndarray:
    """Probe inputs covering the dataset's bounding box plus a margin."""
    X = dataset.X
    d = X.shape[1]
    lo = X.min(axis=0) - 1.0
    hi = X.max(axis=0) + 1.0
    if d == 1:
        return np.linspace(lo[0], hi[0], points)[:, None]
    if d == 2:
        side = max(int(math.ceil(math.sqrt(points))), 2)
        g0 = np.linspace(lo[0], hi[0], side)
        g1 = np.linspace(lo[1], hi[1], side)
        A, B = np.meshgrid(g0, g1, indexing="ij")
        return np.column_stack([A.ravel(), B.ravel()])
    corners = np.vstack([lo, hi])
    return np.vstack([X, corners])
