"""Numerical tolerances and size limits used across the library.

All values are absolute at desk scale (inputs of order one to a hundred)
unless stated otherwise. A single immutable instance :data:`DEFAULTS` is
shared by default; operations accept an optional override.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Config:
    # Feasibility of cone membership / interpolation constraints.
    tol_feas: float = 1e-10
    # Certified duality gap required from the convex solver.
    tol_dual: float = 1e-6
    # Dual-certificate slack and direction-activity threshold.
    tol_dir: float = 1e-7
    # Allowed objective deviation along emitted optimal paths.
    tol_path: float = 1e-5
    # Primal/dual residual stopping threshold inside the splitting solver.
    residual_stop: float = 1e-9
    # Initial penalty parameter of the splitting solver.
    rho_init: float = 1.0
    # Iteration budget of the splitting solver.
    iter_budget: int = 200_000
    # Cap on enumerated activation patterns.
    pattern_cap: int = 4096
    # Cap on generators accepted by the subset width search.
    generator_cap: int = 22
    # Threshold separating a strictly positive coefficient from zero.
    positive_tol: float = 1e-9
    # Relative tolerance of rank decisions (singular-value cutoff).
    rank_tol: float = 1e-9
    # Residual accepted when a subset must reproduce the optimal fit.
    subset_residual: float = 1e-8
    # Dense samples emitted per analytic path segment.
    samples_per_segment: int = 64
    # Minimum total samples on any constructed path.
    min_path_samples: int = 200
    # Maximum parameter jump allowed between adjacent path samples.
    lipschitz_cap: float = 1.0
    # Outer-iteration budget factor of the width-(n+1) connection algorithm
    # (budget = factor * generator count).
    t6_budget_factor: int = 10
    # Polytope faces of dimension above this cap are reported by affine
    # basis only, without vertex harvesting.
    vertex_dim_cap: int = 3


DEFAULTS = Config()
