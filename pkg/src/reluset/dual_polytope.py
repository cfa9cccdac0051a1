"""Dual certificates, unique optimal directions, and the optimal solution set.

The solver's multiplier is audited into a :class:`DualCertificate` whose
feasibility slacks are checked explicitly. Cone projections of the
certified multiplier recover, per activation pattern and sign, the unique
unit direction any optimal neuron of that pattern must use. Those
directions generate the optimal set of the convex program: a polytope

    P* = {c >= 0 : sum_k c_k g_k = y* (+ free skip component)}

over the fixed generators g_k. :func:`decompose` maps any claimed optimal
solution to its polytope coordinates (and rejects non-members), and
:func:`analyze_subsampled` reruns the pipeline on a pattern subset, which
catalogs the first-layer directions of the subsampled program's optima.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import arrangement, convex_core
from .arrangement import MODE_REGRESSION, Dataset, PatternBasis
from .config import Config, DEFAULTS
from .errors import CertificateFailed, EmptySubset, NotOptimal, PreconditionViolated

__all__ = [
    "PatternActivity",
    "DualCertificate",
    "GeneratorRecord",
    "OptimalPolytope",
    "extract_dual",
    "optimal_directions",
    "build_polytope",
    "decompose",
    "analyze_subsampled",
]


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatternActivity:
    """Constraint activity of one activation pattern in the dual."""

    index: int
    active_u: bool
    active_v: bool
    attained: float
    norm_u: float
    norm_v: float


@dataclass(frozen=True)
class DualCertificate:
    """A feasibility-audited dual multiplier.

    ``max_violation`` is the largest amount by which any cone-projection
    norm exceeds the regularization level, ``skip_residual`` the largest
    component of the skip-block equality residual. ``marginal`` lists
    (pattern index, side) pairs whose projection norm sits inside the
    numerical gray band around activity.
    """

    nu: np.ndarray = field(repr=False)
    activity: tuple
    max_violation: float
    skip_residual: float
    marginal: tuple
    dataset: Dataset = field(repr=False, compare=False)
    basis: PatternBasis = field(repr=False, compare=False)

    @property
    def active_count(self) -> int:
        return sum(int(a.active_u) + int(a.active_v) for a in self.activity)


@dataclass(frozen=True)
class GeneratorRecord:
    """One extreme ray of the optimal set.

    ``direction`` is the unit first-layer vector, ``generator`` its signed
    fit contribution per unit coefficient.
    """

    index: int
    side: str
    direction: np.ndarray = field(repr=False)
    generator: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class OptimalPolytope:
    """The optimal solution set of the convex program in coefficient form."""

    y_star: np.ndarray = field(repr=False)
    generators: tuple
    certificate: DualCertificate = field(repr=False)
    has_skip: bool
    optimal_value: float
    dataset: Dataset = field(repr=False, compare=False)
    basis: PatternBasis = field(repr=False, compare=False)

    @property
    def generator_matrix(self) -> np.ndarray:
        """Generators stacked as columns (n x k)."""
        if not self.generators:
            return np.zeros((self.y_star.shape[0], 0))
        return np.column_stack([g.generator for g in self.generators])

    def key_of(self, index: int, side: str) -> int:
        for k, g in enumerate(self.generators):
            if g.index == index and g.side == side:
                return k
        raise KeyError(f"no generator for pattern {index} side {side!r}")


# ---------------------------------------------------------------------------
# Certificate extraction
# ---------------------------------------------------------------------------

def _audit(dataset, basis, nu, config):
    """Projection norms, activity flags, and slack summary of a multiplier."""
    beta = dataset.effective_beta
    Pi_u, Pi_v = convex_core.dual_projections(dataset, basis, nu, config)
    norms_u = np.linalg.norm(Pi_u, axis=1) if len(basis) else np.zeros(0)
    norms_v = np.linalg.norm(Pi_v, axis=1) if len(basis) else np.zeros(0)
    activity = []
    marginal = []
    band = 1e3 * config.tol_dir
    for i in range(len(basis)):
        nu_, nv_ = float(norms_u[i]), float(norms_v[i])
        au = abs(nu_ - beta) <= config.tol_dir
        av = abs(nv_ - beta) <= config.tol_dir
        activity.append(PatternActivity(
            index=i, active_u=au, active_v=av,
            attained=max(nu_, nv_), norm_u=nu_, norm_v=nv_))
        if not au and config.tol_dir < beta - nu_ <= band:
            marginal.append((i, "u"))
        if not av and config.tol_dir < beta - nv_ <= band:
            marginal.append((i, "v"))
    max_violation = float(max(
        (max(norms_u.max(initial=0.0), norms_v.max(initial=0.0)) - beta), 0.0))
    skip_residual = 0.0
    if dataset.has_skip:
        skip_residual = float(np.abs(dataset.effective_design.T @ nu).max(initial=0.0))
    return tuple(activity), max_violation, skip_residual, tuple(marginal)


def extract_dual(report: convex_core.SolveReport, dataset: Dataset,
                 basis: PatternBasis, config: Config = DEFAULTS) -> DualCertificate:
    """Audit the solver's multiplier into a certified dual optimum.

    Under squared loss the multiplier is recomputed from the optimal fit
    (stationarity ties them as fit minus labels); in interpolation mode the
    solver's multiplier is rescaled to exact feasibility. Raises
    CertificateFailed when the audited slacks exceed tolerance.
    """
    if not report.converged:
        raise PreconditionViolated("certificate extraction requires a converged solve")
    if dataset.mode == MODE_REGRESSION:
        nu_raw = report.solution.fit - dataset.y
    else:
        nu_raw = report.dual_candidate
        if nu_raw is None:
            raise CertificateFailed("solver produced no dual multiplier")
    nu = convex_core.restore_dual(dataset, basis, nu_raw, config)
    activity, max_violation, skip_residual, marginal = _audit(dataset, basis, nu, config)
    if max_violation > config.tol_dir:
        raise CertificateFailed(
            f"dual feasibility violated by {max_violation:.3e} (tolerance {config.tol_dir:.1e})")
    if skip_residual > config.tol_dir:
        raise CertificateFailed(
            f"skip-block equality residual {skip_residual:.3e} above {config.tol_dir:.1e}")
    return DualCertificate(
        nu=nu, activity=activity, max_violation=max_violation,
        skip_residual=skip_residual, marginal=marginal,
        dataset=dataset, basis=basis)


# ---------------------------------------------------------------------------
# Directions and polytope
# ---------------------------------------------------------------------------

def optimal_directions(certificate: DualCertificate,
                       basis: PatternBasis | None = None,
                       config: Config = DEFAULTS) -> tuple:
    """Unique unit directions of active (pattern, sign) pairs.

    Every optimal solution's nonzero block for an active pair is a
    nonnegative multiple of the returned direction; inactive pairs are
    absent rather than zero. Emission order is (pattern, u before v).
    """
    dataset = certificate.dataset
    basis = certificate.basis if basis is None else basis
    beta = dataset.effective_beta
    Pi_u, Pi_v = convex_core.dual_projections(dataset, basis, certificate.nu, config)
    records = []
    blocks = [p.diagonal()[:, None] * dataset.effective_design for p in basis]
    for act in certificate.activity:
        i = act.index
        for side, proj, active in (("u", Pi_u[i], act.active_u),
                                   ("v", Pi_v[i], act.active_v)):
            if not active:
                continue
            nrm = float(np.linalg.norm(proj))
            direction = proj / nrm
            sign = 1.0 if side == "u" else -1.0
            records.append(GeneratorRecord(
                index=i, side=side, direction=direction,
                generator=sign * (blocks[i] @ direction)))
    return tuple(records)


def build_polytope(dataset: Dataset, basis: PatternBasis,
                   config: Config = DEFAULTS,
                   report: convex_core.SolveReport | None = None) -> OptimalPolytope:
    """Solve, certify, and return the optimal set in generator form.

    The solver's own solution is decomposed as a consistency check before
    the polytope is returned. Passing a ``report`` from an earlier
    :func:`~reluset.convex_core.solve` call on the same dataset and basis
    skips the internal solve.
    """
    if report is None:
        report = convex_core.solve(dataset, basis, config)
    certificate = extract_dual(report, dataset, basis, config)
    generators = optimal_directions(certificate, basis, config)
    poly = OptimalPolytope(
        y_star=report.solution.fit.copy(),
        generators=generators,
        certificate=certificate,
        has_skip=dataset.has_skip,
        optimal_value=report.solution.objective,
        dataset=dataset,
        basis=basis)
    _membership_check(poly, config)
    return poly


def _membership_check(polytope: OptimalPolytope, config: Config) -> None:
    """Validate that y* is reachable from the generators (plus skip span)."""
    y_star = polytope.y_star
    G = polytope.generator_matrix
    Q = convex_core.skip_basis(polytope.dataset)
    if Q is not None:
        Gr = G - Q @ (Q.T @ G) if G.shape[1] else G
        yr = y_star - Q @ (Q.T @ y_star)
    else:
        Gr, yr = G, y_star
    if Gr.shape[1]:
        c = arrangement.nnls_linear(Gr, yr)
        resid = float(np.abs(Gr @ c - yr).max(initial=0.0))
    else:
        resid = float(np.abs(yr).max(initial=0.0))
    scale = 1.0 + float(np.abs(y_star).max(initial=0.0))
    if resid > max(config.tol_feas * scale, 1e-7 * scale):
        raise CertificateFailed(
            f"optimal fit is not reachable from the certified generators "
            f"(residual {resid:.3e})")


def decompose(polytope: OptimalPolytope, solution: convex_core.ConvexSolution,
              config: Config = DEFAULTS) -> np.ndarray:
    """Coordinates of an optimal solution in the polytope's generator basis.

    Returns the nonnegative coefficient vector c with c_k the norm of the
    matching block. Raises NotOptimal when the solution is not a member:
    objective off the optimum, mass on an inactive (pattern, sign) pair,
    a block misaligned with its unique direction, or fit mismatch.
    """
    dataset = polytope.dataset
    basis = polytope.basis
    obj = convex_core.objective(dataset, solution)
    if obj > polytope.optimal_value + 10.0 * config.tol_dual:
        raise NotOptimal(
            f"objective {obj:.9g} exceeds optimum {polytope.optimal_value:.9g} "
            f"by more than {10.0 * config.tol_dual:.1e}")
    scale = 1.0 + float(np.abs(polytope.y_star).max(initial=0.0))
    mass_tol = 1e-5 * scale
    c = np.zeros(len(polytope.generators))
    for side, mat in (("u", solution.u), ("v", solution.v)):
        for i in range(len(basis)):
            blk = np.asarray(mat[i], float)
            nrm = float(np.linalg.norm(blk))
            if nrm <= mass_tol:
                continue
            try:
                k = polytope.key_of(i, side)
            except KeyError:
                raise NotOptimal(
                    f"pattern {i} side {side!r} carries mass {nrm:.3e} "
                    "but is inactive in the certificate") from None
            direction = polytope.generators[k].direction
            miss = float(np.linalg.norm(blk - nrm * direction)) / nrm
            if miss > 1e-6:
                raise NotOptimal(
                    f"pattern {i} side {side!r} deviates {miss:.3e} rad "
                    "from the unique optimal direction")
            c[k] = nrm
    recon = polytope.generator_matrix @ c
    if polytope.has_skip:
        if solution.skip is not None:
            recon = recon + dataset.effective_design @ solution.skip
    resid = float(np.abs(recon - polytope.y_star).max(initial=0.0))
    if resid > max(config.tol_feas * scale, 10.0 * mass_tol):
        raise NotOptimal(f"fit reconstruction residual {resid:.3e}")
    return c


def analyze_subsampled(dataset: Dataset, subset,
                       config: Config = DEFAULTS) -> OptimalPolytope:
    """Optimal set of the program restricted to a subset of patterns.

    The returned generator directions catalog the first-layer directions
    of every optimum of the subsampled program (the stationary points the
    full nonconvex objective inherits from that subset).
    """
    patterns = list(subset)
    if not patterns:
        raise EmptySubset("pattern subset is empty")
    Xe = dataset.effective_design
    for p in patterns:
        signs = 2.0 * p.diagonal() - 1.0
        margins = signs * (Xe @ np.asarray(p.witness, float))
        if margins.size and float(margins.min()) <= 0.0:
            raise PreconditionViolated(
                f"pattern {p.mask} witness is not strict for this dataset")
    sub_basis = PatternBasis(patterns, Xe)
    return build_polytope(dataset, sub_basis, config)
