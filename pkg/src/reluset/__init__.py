"""Exact solution sets of weight-decay-regularized two-layer ReLU networks.

The package solves the convex reformulation of the two-layer ReLU
training problem, certifies optimality with a dual vector, enumerates
the generators of the optimal set, classifies connectivity regimes by
network width, and constructs explicit optimal paths between optima.
"""

from .arrangement import (
    MODE_INTERPOLATION,
    MODE_REGRESSION,
    ActivationPattern,
    ConeHandle,
    Dataset,
    PatternBasis,
    cone,
    cones,
    cover_bound,
    enumerate_patterns,
    nnls_linear,
    project_onto_cone,
    relu,
)
from .config import Config, DEFAULTS
from .convex_core import (
    ConvexSolution,
    SolveReport,
    dual_projections,
    dual_value,
    fit_of,
    objective,
    restore_dual,
    skip_basis,
    solve,
)
from .dual_polytope import (
    DualCertificate,
    GeneratorRecord,
    OptimalPolytope,
    PatternActivity,
    analyze_subsampled,
    build_polytope,
    decompose,
    extract_dual,
    optimal_directions,
)
from .errors import (
    CertificateFailed,
    DegenerateData,
    Diverged,
    EmptySubset,
    Infeasible,
    InvalidGeometry,
    LimitExceeded,
    NoConvergence,
    NoSolution,
    NotConnected,
    NotNearOptimal,
    NotOptimal,
    PreconditionViolated,
    RelusetError,
    ShapeMismatch,
    WidthTooSmall,
)
from .interpolators import (
    ANGLES,
    ARCH_BIAS_ONLY,
    ARCH_PLAIN,
    ARCH_SKIP_BIAS,
    ARCH_SKIP_ONLY,
    BUILTIN_NAMES,
    BuiltinExample,
    FamilySegment,
    InterpolatorFamily,
    NonuniqueClass,
    architecture_tag,
    builtin_example,
    default_probe_grid,
    eval_model,
    generate_nonunique_class,
    optimal_interpolator_family,
)
from .landscape import (
    GDConfig,
    LandscapeGrid,
    SLICE_IDS,
    landscape_slice,
    nonincreasing_demo,
    random_network,
    slice_network,
    train_nonconvex_gd,
)
from .staircase import (
    BELOW_EQUIVALENCE,
    CONTINUUM_EXISTS,
    FINITE_SET,
    FULLY_CONNECTED,
    ISOLATED_POINT_EXISTS,
    PERMUTATIONS_CONNECTED,
    RegimeReport,
    critical_widths,
    is_irreducible,
    minimal_support_point,
    prune_to_irreducible,
    regime_flags,
)
from .transport import (
    AUTO,
    N_PLUS_ONE,
    SUM_WIDTHS,
    NetworkParams,
    ParameterPath,
    PathEvent,
    PathSegmentInfo,
    PathVerification,
    connect,
    merge_minimal,
    network_fit,
    network_objective,
    params_equal,
    permutation_bridge,
    permute_params,
    phi,
    psi,
    reduce_support,
    verify_path,
)

__version__ = "0.1.0"

__all__ = [
    "ANGLES",
    "ARCH_BIAS_ONLY",
    "ARCH_PLAIN",
    "ARCH_SKIP_BIAS",
    "ARCH_SKIP_ONLY",
    "AUTO",
    "BELOW_EQUIVALENCE",
    "BUILTIN_NAMES",
    "ActivationPattern",
    "BuiltinExample",
    "CONTINUUM_EXISTS",
    "CertificateFailed",
    "ConeHandle",
    "Config",
    "ConvexSolution",
    "DEFAULTS",
    "Dataset",
    "DegenerateData",
    "Diverged",
    "DualCertificate",
    "EmptySubset",
    "FINITE_SET",
    "FULLY_CONNECTED",
    "FamilySegment",
    "GDConfig",
    "GeneratorRecord",
    "ISOLATED_POINT_EXISTS",
    "Infeasible",
    "InterpolatorFamily",
    "InvalidGeometry",
    "LandscapeGrid",
    "LimitExceeded",
    "MODE_INTERPOLATION",
    "MODE_REGRESSION",
    "N_PLUS_ONE",
    "NetworkParams",
    "NoConvergence",
    "NoSolution",
    "NonuniqueClass",
    "NotConnected",
    "NotNearOptimal",
    "NotOptimal",
    "OptimalPolytope",
    "PERMUTATIONS_CONNECTED",
    "ParameterPath",
    "PathEvent",
    "PathSegmentInfo",
    "PathVerification",
    "PatternActivity",
    "PatternBasis",
    "PreconditionViolated",
    "RegimeReport",
    "RelusetError",
    "SLICE_IDS",
    "SUM_WIDTHS",
    "ShapeMismatch",
    "SolveReport",
    "WidthTooSmall",
    "analyze_subsampled",
    "architecture_tag",
    "build_polytope",
    "builtin_example",
    "cone",
    "cones",
    "connect",
    "cover_bound",
    "critical_widths",
    "decompose",
    "default_probe_grid",
    "dual_projections",
    "dual_value",
    "enumerate_patterns",
    "eval_model",
    "extract_dual",
    "fit_of",
    "generate_nonunique_class",
    "is_irreducible",
    "landscape_slice",
    "merge_minimal",
    "minimal_support_point",
    "network_fit",
    "network_objective",
    "nnls_linear",
    "nonincreasing_demo",
    "objective",
    "optimal_directions",
    "optimal_interpolator_family",
    "params_equal",
    "permutation_bridge",
    "permute_params",
    "phi",
    "project_onto_cone",
    "prune_to_irreducible",
    "psi",
    "random_network",
    "reduce_support",
    "regime_flags",
    "relu",
    "restore_dual",
    "skip_basis",
    "slice_network",
    "solve",
    "train_nonconvex_gd",
    "verify_path",
]
