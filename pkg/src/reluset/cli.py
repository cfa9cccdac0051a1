"""Command-line interface: analyze datasets, export reports and paths.

Subcommands
-----------
analyze
    Solve, certify, classify widths, and write ``report.json``.
solve
    Solve the convex program and print objective and diagnostics.
widths
    Print the critical widths and the per-width regime table.
connect
    Build an optimal path between two synthesized optima, write ``path.csv``.
counterexample
    Emit a built-in or generated non-uniqueness dataset with its family.
family
    Parametrize all optimal networks of a dataset, write ``family.csv``.
landscape
    Evaluate a named two-dimensional loss slice, write ``grid.csv``.
train
    Run full-batch gradient descent, write ``trace.csv``.
demo-corollary1
    Gradient descent followed by an optimal ride to a target network,
    written as a single nonincreasing ``path.csv``.

Exit codes: 0 success, 2 validation or infeasible input, 3 size limit
exceeded, 4 non-convergence. Errors print one machine-parsable line
``TAG: message`` on stderr.

All files are byte-stable: floats are serialized with 17 significant
digits (exact float64 round-trip), JSON keys are sorted, and nothing
run-dependent (timing, hostnames) is written to disk.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import itertools
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, convex_core, dual_polytope
from .arrangement import (
    MODE_INTERPOLATION,
    MODE_REGRESSION,
    Dataset,
    enumerate_patterns,
)
from .config import Config, DEFAULTS
from .dual_polytope import DualCertificate, OptimalPolytope, build_polytope
from .errors import (
    CertificateFailed,
    Diverged,
    LimitExceeded,
    NoConvergence,
    NoSolution,
    NotNearOptimal,
    PreconditionViolated,
    RelusetError,
    ShapeMismatch,
)
from .interpolators import (
    BUILTIN_NAMES,
    builtin_example,
    default_probe_grid,
    eval_model,
    generate_nonunique_class,
    optimal_interpolator_family,
)
from .landscape import (
    GDConfig,
    SLICE_IDS,
    landscape_slice,
    nonincreasing_demo,
    random_network,
    train_nonconvex_gd,
)
from .staircase import critical_widths, is_irreducible, minimal_support_point
from .transport import (
    AUTO,
    N_PLUS_ONE,
    SUM_WIDTHS,
    connect,
    network_objective,
    psi,
    verify_path,
)

__all__ = ["main", "build_report", "revalidate_report"]

SCHEMA_VERSION = 1

_STRATEGIES = {"sum": SUM_WIDTHS, "nplus1": N_PLUS_ONE, "auto": AUTO}

# Exit codes by error class; every other RelusetError is a validation
# failure (exit 2).
_EXIT_CODES = (
    (LimitExceeded, 3),
    (NoConvergence, 4),
    (CertificateFailed, 4),
    (Diverged, 4),
    (NotNearOptimal, 4),
)


# ---------------------------------------------------------------------------
# Deterministic serialization
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    """17-significant-digit decimal form of a float (exact round-trip)."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"refusing to serialize non-finite value {x!r}")
    return format(x, ".17g")


def _render_json(value, indent: int = 0) -> str:
    """Render a report dict with sorted keys and .17g floats.

    The standard library encoder formats floats with repr and offers no
    hook to change that, so this small renderer handles the fixed, flat
    vocabulary of report payloads (dict, list, str, bool, int, float,
    None) itself. Lists of scalars render on one line.
    """
    pad = " " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        parts = [f'{pad}  {json.dumps(str(k))}: {_render_json(value[k], indent + 2)}'
                 for k in sorted(value)]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if len(value) == 0:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in value):
            return "[" + ", ".join(_render_json(v) for v in value) + "]"
        parts = [f"{pad}  {_render_json(v, indent + 2)}" for v in value]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _fmt(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"unsupported report value type {type(value).__name__}")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(_render_json(payload) + "\n")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return _fmt(v)


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Input loading
# ---------------------------------------------------------------------------

def _load_dataset(args) -> Dataset:
    """Read a ``x1,...,xd,y`` CSV and build the dataset from the flags."""
    path = Path(args.data)
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if any(c.strip() for c in row)]
    if not rows:
        raise ShapeMismatch(f"{path}: empty data file; expected header x1,...,xd,y")
    header = [c.strip() for c in rows[0]]
    d = len(header) - 1
    if d < 1 or header != [f"x{i}" for i in range(1, d + 1)] + ["y"]:
        raise ShapeMismatch(
            f"{path}: bad header {header!r}; expected x1,...,xd,y")
    body = rows[1:]
    if not body:
        raise ShapeMismatch(f"{path}: no data rows after the header")
    try:
        table = np.array([[float(c) for c in row] for row in body])
    except ValueError as err:
        raise ShapeMismatch(f"{path}: non-numeric cell ({err})")
    if table.ndim != 2 or table.shape[1] != d + 1:
        raise ShapeMismatch(
            f"{path}: rows have inconsistent column counts")
    return Dataset(X=table[:, :d], y=table[:, d], beta=args.beta,
                   mode=args.mode, has_bias=args.bias, has_skip=args.skip)


def _config_from(args) -> Config:
    overrides = {}
    if getattr(args, "limit_patterns", None) is not None:
        overrides["pattern_cap"] = int(args.limit_patterns)
    if getattr(args, "limit_generators", None) is not None:
        overrides["generator_cap"] = int(args.limit_generators)
    return dataclasses.replace(DEFAULTS, **overrides) if overrides else DEFAULTS


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", ".") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Report construction and revalidation
# ---------------------------------------------------------------------------

def build_report(dataset: Dataset, config: Config = DEFAULTS) -> dict:
    """Solve, certify, classify, and assemble the full analysis payload."""
    basis = enumerate_patterns(dataset, config)
    solve_report = convex_core.solve(dataset, basis, config)
    polytope = build_polytope(dataset, basis, config, report=solve_report)
    regime = critical_widths(polytope, config)
    cert = polytope.certificate
    generators = [
        {
            "pattern": [int(b) for b in basis[g.index].mask],
            "side": g.side,
            "sign": 1 if g.side == "u" else -1,
            "direction": [float(v) for v in g.direction],
            "generator": [float(v) for v in g.generator],
        }
        for g in polytope.generators
    ]
    return {
        "schema": SCHEMA_VERSION,
        "tool": {"name": "reluset", "version": __version__},
        "dataset": {
            "n": int(dataset.n),
            "d": int(dataset.X.shape[1]),
            "beta": float(dataset.beta),
            "mode": dataset.mode,
            "has_bias": bool(dataset.has_bias),
            "has_skip": bool(dataset.has_skip),
            "x": [[float(v) for v in row] for row in dataset.X],
            "y": [float(v) for v in dataset.y],
        },
        "objective": float(solve_report.solution.objective),
        "y_star": [float(v) for v in polytope.y_star],
        "nu": [float(v) for v in cert.nu],
        "certificate": {
            "max_violation": float(cert.max_violation),
            "skip_residual": float(cert.skip_residual),
            "active_count": int(cert.active_count),
        },
        "pattern_count": len(basis),
        "generators": generators,
        "widths": {
            "m_star": int(regime.m_star),
            "M_star": int(regime.M_star),
            "full_connection_width": int(regime.full_connection_width),
            "regimes": {str(m): sorted(regime.widths[m])
                        for m in sorted(regime.widths)},
        },
        "diagnostics": {
            "gap": float(solve_report.gap),
            "iterations": int(solve_report.iterations),
            "converged": bool(solve_report.converged),
            "primal_residual": float(solve_report.primal_residual),
            "dual_residual": float(solve_report.dual_residual),
            "dual_value": float(solve_report.dual_value),
        },
    }


def revalidate_report(report: dict, config: Config = DEFAULTS) -> dict:
    """Re-check a loaded report's certificate against its own dataset.

    Rebuilds the dataset from the stored inputs, re-enumerates the
    activation patterns, re-audits the stored dual vector, reconstructs
    the generator table, and confirms the stored optimal fit is still
    reachable. Unknown fields are ignored, so reports written by newer
    tools with extra keys revalidate cleanly. Raises
    :class:`CertificateFailed` on any mismatch.
    """
    info = report["dataset"]
    dataset = Dataset(X=np.asarray(info["x"], dtype=float),
                      y=np.asarray(info["y"], dtype=float),
                      beta=float(info["beta"]), mode=info["mode"],
                      has_bias=bool(info["has_bias"]),
                      has_skip=bool(info["has_skip"]))
    basis = enumerate_patterns(dataset, config)
    if len(basis) != int(report["pattern_count"]):
        raise CertificateFailed(
            f"pattern count changed: report says {report['pattern_count']}, "
            f"recomputed {len(basis)}")
    nu = np.asarray(report["nu"], dtype=float)
    activity, max_violation, skip_residual, marginal = dual_polytope._audit(
        dataset, basis, nu, config)
    if max_violation > config.tol_dir:
        raise CertificateFailed(
            f"dual vector violates the unit bound by {max_violation:.3e}")
    if skip_residual > config.tol_dir:
        raise CertificateFailed(
            f"dual vector leaves skip residual {skip_residual:.3e}")
    cert = DualCertificate(nu=nu, activity=activity,
                           max_violation=max_violation,
                           skip_residual=skip_residual, marginal=marginal,
                           dataset=dataset, basis=basis)
    records = dual_polytope.optimal_directions(cert, basis, config)
    stored = report["generators"]
    if len(records) != len(stored):
        raise CertificateFailed(
            f"generator count changed: report says {len(stored)}, "
            f"recomputed {len(records)}")
    for rec, row in zip(records, stored):
        if list(basis[rec.index].mask) != [int(b) for b in row["pattern"]] \
                or rec.side != row["side"]:
            raise CertificateFailed("generator table ordering changed")
        if not np.allclose(rec.generator, np.asarray(row["generator"], float),
                           atol=1e-9, rtol=1e-9):
            raise CertificateFailed("a stored generator no longer matches")
    y_star = np.asarray(report["y_star"], dtype=float)
    polytope = OptimalPolytope(y_star=y_star, generators=records,
                               certificate=cert, has_skip=dataset.has_skip,
                               optimal_value=float(report["objective"]),
                               dataset=dataset, basis=basis)
    dual_polytope._membership_check(polytope, config)
    value_gap = abs(convex_core.dual_value(dataset, nu)
                    - float(report["objective"]))
    scale = 1.0 + abs(float(report["objective"]))
    if value_gap > config.tol_dual * scale:
        raise CertificateFailed(
            f"dual value drifted from the stored objective by {value_gap:.3e}")
    return {
        "max_violation": float(max_violation),
        "skip_residual": float(skip_residual),
        "dual_value_gap": float(value_gap),
        "generator_count": len(records),
    }


# ---------------------------------------------------------------------------
# Shared writers
# ---------------------------------------------------------------------------

def _path_header(m: int, d_eff: int, has_skip: bool) -> list:
    header = ["t"]
    for j in range(1, m + 1):
        header.extend(f"w{j}_{c}" for c in range(1, d_eff + 1))
    header.extend(f"a{j}" for j in range(1, m + 1))
    if has_skip:
        header.extend(f"skip{c}" for c in range(1, d_eff + 1))
    header.append("objective")
    return header


def _write_path_csv(out: Path, path, dataset: Dataset) -> Path:
    first = path.samples[0][1]
    m, d_eff = first.weights.shape
    target = out / "path.csv"
    rows = []
    for t, params in path.samples:
        row = [t]
        row.extend(params.weights.ravel())
        row.extend(params.amplitudes)
        if dataset.has_skip:
            row.extend(params.skip if params.skip is not None
                       else np.zeros(d_eff))
        row.append(network_objective(params, dataset))
        rows.append(row)
    _write_csv(target, _path_header(m, d_eff, dataset.has_skip), rows)
    return target


def _write_dataset_csv(out: Path, dataset: Dataset) -> Path:
    d = dataset.X.shape[1]
    target = out / "dataset.csv"
    header = [f"x{i}" for i in range(1, d + 1)] + ["y"]
    rows = [list(row) + [yv] for row, yv in zip(dataset.X, dataset.y)]
    _write_csv(target, header, rows)
    return target


def _family_members(family, references=()):
    """Label, parameter, and network of every family.csv row."""
    members = []
    for i, params in enumerate(references, start=1):
        members.append((f"ref{i}", None, params))
    if family.dimension == 0:
        members.append(("point", family.t_lo,
                        family.member_at(family.t_lo)))
    elif family.dimension == 1:
        ts = np.linspace(family.t_lo, family.t_hi, 20)
        for i, t in enumerate(ts, start=1):
            members.append((f"member{i:02d}", float(t),
                            family.member_at(float(t))))
    else:
        points = [np.asarray(v, dtype=float) for v in family.vertices]
        label = "vertex"
        if not points:
            points = [np.asarray(c, dtype=float)
                      for c in family.endpoint_coefficients()]
            label = "endpoint"
        for i, c in enumerate(points, start=1):
            width = max(int(np.count_nonzero(c > 0.0)), 1)
            members.append((f"{label}{i:02d}", None,
                            psi(c, family.polytope, width)))
    return members


def _write_family_csv(out: Path, dataset: Dataset, family,
                      references=()) -> Path:
    probes = default_probe_grid(dataset)
    width = max(2, len(str(len(probes))))
    header = ["member", "t", "objective"]
    header.extend(f"f{i:0{width}d}" for i in range(1, len(probes) + 1))
    rows = []
    for label, t, params in _family_members(family, references):
        values = eval_model(params, probes, dataset)
        rows.append([label, t, network_objective(params, dataset)]
                    + list(values))
    target = out / "family.csv"
    _write_csv(target, header, rows)
    return target


# ---------------------------------------------------------------------------
# Endpoint synthesis for connect
# ---------------------------------------------------------------------------

def _last_irreducible_point(polytope: OptimalPolytope,
                            config: Config = DEFAULTS) -> np.ndarray:
    """The last irreducible optimal point in subset order.

    Mirrors :func:`~reluset.staircase.minimal_support_point` with the
    enumeration reversed (largest cardinality first, reversed
    lexicographic order within each cardinality), so it lands on the
    maximum-support irreducible representation.
    """
    G = polytope.generator_matrix
    n, k = G.shape
    if k > config.generator_cap:
        raise LimitExceeded(
            f"{k} generators exceed the subset-search cap {config.generator_cap}")
    if k == 0:
        return minimal_support_point(polytope, config)
    Q = convex_core.skip_basis(polytope.dataset)
    skip_cols = Q if Q is not None else np.zeros((n, 0))
    y_star = polytope.y_star
    scale = 1.0 + float(np.abs(y_star).max(initial=0.0))
    for t in range(min(n, k), 0, -1):
        for idx in reversed(list(itertools.combinations(range(k), t))):
            S = G[:, list(idx)]
            A = np.hstack([S, skip_cols])
            coef, *_ = np.linalg.lstsq(A, y_star, rcond=None)
            if float(np.linalg.norm(A @ coef - y_star)) > config.subset_residual * scale:
                continue
            if not np.all(coef[:t] > config.positive_tol):
                continue
            c = np.zeros(k)
            c[list(idx)] = coef[:t]
            if not is_irreducible(polytope, c, config):
                continue
            return c
    raise NoSolution("no generator subset reproduces the optimal fit")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_analyze(args) -> int:
    config = _config_from(args)
    dataset = _load_dataset(args)
    out = _out_dir(args)
    started = time.perf_counter()
    report = build_report(dataset, config)
    elapsed = time.perf_counter() - started
    target = out / "report.json"
    _write_json(target, report)
    widths = report["widths"]
    print(f"n={report['dataset']['n']} d={report['dataset']['d']} "
          f"mode={dataset.mode} beta={_fmt(dataset.beta)} "
          f"bias={dataset.has_bias} skip={dataset.has_skip}")
    print(f"objective {_fmt(report['objective'])}")
    print(f"m* = {widths['m_star']}, M* = {widths['M_star']} "
          f"(fully connected from m = {widths['full_connection_width']})")
    print(f"patterns {report['pattern_count']}, "
          f"generators {len(report['generators'])}, "
          f"certificate violation {report['certificate']['max_violation']:.3e}")
    print(f"wrote {target} ({elapsed:.2f} s)")
    return 0


def _cmd_solve(args) -> int:
    config = _config_from(args)
    dataset = _load_dataset(args)
    basis = enumerate_patterns(dataset, config)
    started = time.perf_counter()
    report = convex_core.solve(dataset, basis, config)
    elapsed = time.perf_counter() - started
    print(f"objective {_fmt(report.solution.objective)}")
    print("fit " + " ".join(_fmt(v) for v in report.solution.fit))
    print(f"duality gap {report.gap:.3e}, iterations {report.iterations}, "
          f"converged {report.converged} ({elapsed:.2f} s)")
    return 0


def _cmd_widths(args) -> int:
    config = _config_from(args)
    dataset = _load_dataset(args)
    basis = enumerate_patterns(dataset, config)
    polytope = build_polytope(dataset, basis, config)
    regime = critical_widths(polytope, config)
    print(f"m* = {regime.m_star}, M* = {regime.M_star} "
          f"(fully connected from m = {regime.full_connection_width})")
    for m in sorted(regime.widths):
        flags = ", ".join(sorted(regime.widths[m])) or "-"
        print(f"  m={m}: {flags}")
    return 0


def _cmd_connect(args) -> int:
    config = _config_from(args)
    dataset = _load_dataset(args)
    out = _out_dir(args)
    basis = enumerate_patterns(dataset, config)
    polytope = build_polytope(dataset, basis, config)
    m = args.m if args.m is not None else dataset.n + 1
    c_first = minimal_support_point(polytope, config)
    c_last = _last_irreducible_point(polytope, config)
    theta_a = psi(c_first, polytope, m, config)
    theta_b = psi(c_last, polytope, m, config)
    path = connect(theta_a, theta_b, dataset,
                   strategy=_STRATEGIES[args.strategy], config=config,
                   polytope=polytope)
    check = verify_path(path, dataset, polytope.optimal_value, config)
    target = _write_path_csv(out, path, dataset)
    print(f"endpoints: supports {int(np.count_nonzero(c_first > 0))} and "
          f"{int(np.count_nonzero(c_last > 0))}, width m={m}")
    print(f"samples {check.sample_count}, "
          f"max objective deviation {check.max_objective_deviation:.3e}, "
          f"verified {check.passed}")
    print(f"wrote {target}")
    return 0


def _cmd_counterexample(args) -> int:
    config = _config_from(args)
    out = _out_dir(args)
    if args.builtin is not None:
        if args.angles:
            raise PreconditionViolated("--angles applies only with --class-n")
        example = builtin_example(args.builtin)
        dataset = example.dataset
        references = example.reference_models
        print(example.summary)
    else:
        if args.angles:
            degrees = [float(a) for a in args.angles.split(",")]
            thetas = np.radians(np.asarray(degrees, dtype=float))
            s = np.column_stack([np.cos(thetas), np.sin(thetas)])
            nn = len(degrees)
            v = np.empty((nn, 2))
            v[nn - 1] = s[0]
            for k in range(1, nn):
                v[nn - 1 - k] = s[k] - s[k - 1]
            planted = generate_nonunique_class(args.class_n, v_vectors=v)
        else:
            planted = generate_nonunique_class(args.class_n)
        dataset = planted.dataset
        references = ()
        print(f"planted class: n={args.class_n}, "
              f"optimal value {_fmt(planted.optimal_value)}, "
              f"{planted.directions.shape[0]} optimal directions")
    family = optimal_interpolator_family(dataset, config)
    data_target = _write_dataset_csv(out, dataset)
    family_target = _write_family_csv(out, dataset, family,
                                      references=references)
    print(f"optimal objective {_fmt(family.objective)}, "
          f"family dimension {family.dimension}")
    print(f"wrote {data_target}")
    print(f"wrote {family_target}")
    return 0


def _cmd_family(args) -> int:
    config = _config_from(args)
    dataset = _load_dataset(args)
    out = _out_dir(args)
    family = optimal_interpolator_family(dataset, config)
    target = _write_family_csv(out, dataset, family)
    print(f"objective {_fmt(family.objective)}, "
          f"dimension {family.dimension}, architecture {family.architecture}")
    if family.dimension == 1:
        print(f"t range [{_fmt(family.t_lo)}, {_fmt(family.t_hi)}]")
    if family.vertices:
        print(f"vertices {len(family.vertices)}")
    print(f"wrote {target}")
    return 0


def _cmd_landscape(args) -> int:
    out = _out_dir(args)
    grid = landscape_slice(args.slice, beta=args.beta,
                           resolution=args.resolution)
    rows = [(t, s, grid.values[i, j])
            for i, t in enumerate(grid.t_values)
            for j, s in enumerate(grid.s_values)]
    target = out / "grid.csv"
    _write_csv(target, ["t", "s", "F"], rows)
    t_min, s_min = grid.argmin()
    print(f"slice {args.slice}, beta {_fmt(args.beta)}, "
          f"{len(grid.t_values)}x{len(grid.s_values)} grid")
    print(f"minimum {_fmt(grid.min_value)} at (t, s) = "
          f"({_fmt(t_min)}, {_fmt(s_min)})")
    print(f"wrote {target}")
    return 0


def _cmd_train(args) -> int:
    config = _config_from(args)
    dataset = _load_dataset(args)
    out = _out_dir(args)
    gd_beta = None if dataset.mode == MODE_REGRESSION else float(args.beta)
    gd_config = GDConfig(m=args.m, beta=gd_beta, lr=args.lr,
                         steps=args.steps, seed=args.seed,
                         init_scale=args.init_scale)
    params, trace = train_nonconvex_gd(dataset, gd_config)
    target = out / "trace.csv"
    _write_csv(target, ["step", "cost"],
               [(i, c) for i, c in enumerate(trace)])
    compare = dataset if dataset.mode == MODE_REGRESSION else Dataset(
        X=dataset.X, y=dataset.y, beta=gd_beta, mode=MODE_REGRESSION,
        has_bias=dataset.has_bias, has_skip=dataset.has_skip)
    basis = enumerate_patterns(compare, config)
    optimum = convex_core.solve(compare, basis, config).solution.objective
    final = float(trace[-1])
    print(f"final cost {_fmt(final)} after {args.steps} steps "
          f"(m={args.m}, lr={_fmt(args.lr)}, seed={args.seed})")
    print(f"convex optimum {_fmt(optimum)}, excess {final - optimum:.3e}")
    print(f"wrote {target}")
    return 0


def _cmd_demo_corollary1(args) -> int:
    config = _config_from(args)
    dataset = _load_dataset(args)
    out = _out_dir(args)
    basis = enumerate_patterns(dataset, config)
    polytope = build_polytope(dataset, basis, config)
    target_net = psi(minimal_support_point(polytope, config),
                     polytope, args.m, config)
    start = random_network(dataset, args.m, seed=args.seed,
                           init_scale=args.init_scale)
    gd_config = GDConfig(m=args.m, lr=args.lr, steps=args.steps,
                         seed=args.seed, init_scale=args.init_scale)
    path = nonincreasing_demo(dataset, start, target_net,
                              gd_config=gd_config,
                              strategy=_STRATEGIES[args.strategy],
                              config=config)
    csv_target = _write_path_csv(out, path, dataset)
    objectives = [network_objective(p, dataset) for _, p in path.samples]
    print(f"start cost {_fmt(objectives[0])}, final {_fmt(objectives[-1])}, "
          f"optimum {_fmt(polytope.optimal_value)}")
    print(f"samples {len(path.samples)}, "
          f"worst adjacent increase "
          f"{max(b - a for a, b in zip(objectives, objectives[1:])):.3e}")
    print(f"wrote {csv_target}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_data_flags(sub) -> None:
    sub.add_argument("--data", required=True,
                     help="CSV file with header x1,...,xd,y")
    sub.add_argument("--bias", action="store_true",
                     help="append a constant-one column to the inputs")
    sub.add_argument("--skip", action="store_true",
                     help="add an unregularized linear skip term")
    sub.add_argument("--beta", type=float, default=1.0,
                     help="weight-decay constant (default 1.0)")
    sub.add_argument("--mode", choices=(MODE_REGRESSION, MODE_INTERPOLATION),
                     default=MODE_REGRESSION,
                     help="regularized regression or exact interpolation")
    sub.add_argument("--limit-patterns", type=int, default=None,
                     help="abort if the pattern count exceeds this")
    sub.add_argument("--limit-generators", type=int, default=None,
                     help="abort if the generator count exceeds this")


def _add_out_flag(sub) -> None:
    sub.add_argument("--out", default=".",
                     help="output directory (default: current directory)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reluset",
        description="Exact optimal sets of two-layer ReLU networks.")
    parser.add_argument("--version", action="version",
                        version=f"reluset {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("analyze",
                          help="full analysis report with certificate")
    _add_data_flags(sub)
    _add_out_flag(sub)
    sub.set_defaults(func=_cmd_analyze)

    sub = subs.add_parser("solve", help="convex objective and diagnostics")
    _add_data_flags(sub)
    sub.set_defaults(func=_cmd_solve)

    sub = subs.add_parser("widths", help="critical widths and regime table")
    _add_data_flags(sub)
    sub.set_defaults(func=_cmd_widths)

    sub = subs.add_parser("connect",
                          help="optimal path between two synthesized optima")
    _add_data_flags(sub)
    _add_out_flag(sub)
    sub.add_argument("--m", type=int, default=None,
                     help="network width (default: n + 1)")
    sub.add_argument("--strategy", choices=tuple(_STRATEGIES),
                     default="auto", help="path construction strategy")
    sub.set_defaults(func=_cmd_connect)

    sub = subs.add_parser("counterexample",
                          help="non-uniqueness dataset with its family")
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--builtin", choices=tuple(BUILTIN_NAMES),
                       help="named example dataset")
    group.add_argument("--class-n", type=int, dest="class_n",
                       help="generate the planted n-point class instance")
    sub.add_argument("--angles", default=None,
                     help="comma-separated partial-sum angles in degrees "
                          "(with --class-n; default: equally spaced 30..90)")
    sub.add_argument("--limit-patterns", type=int, default=None)
    sub.add_argument("--limit-generators", type=int, default=None)
    _add_out_flag(sub)
    sub.set_defaults(func=_cmd_counterexample)

    sub = subs.add_parser("family",
                          help="parametrize every optimal network")
    _add_data_flags(sub)
    _add_out_flag(sub)
    sub.set_defaults(func=_cmd_family)

    sub = subs.add_parser("landscape", help="two-dimensional loss slice")
    sub.add_argument("--slice", choices=SLICE_IDS, required=True)
    sub.add_argument("--beta", type=float, default=0.1)
    sub.add_argument("--resolution", type=int, default=81,
                     help="grid points per axis (default 81)")
    _add_out_flag(sub)
    sub.set_defaults(func=_cmd_landscape)

    sub = subs.add_parser("train", help="full-batch gradient descent")
    _add_data_flags(sub)
    _add_out_flag(sub)
    sub.add_argument("--m", type=int, required=True, help="network width")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--lr", type=float, default=1e-2)
    sub.add_argument("--steps", type=int, default=20000)
    sub.add_argument("--init-scale", type=float, default=0.5)
    sub.set_defaults(func=_cmd_train)

    sub = subs.add_parser("demo-corollary1",
                          help="gradient descent then an optimal ride, "
                               "as one nonincreasing path")
    _add_data_flags(sub)
    _add_out_flag(sub)
    sub.add_argument("--m", type=int, required=True,
                     help="network width (at least n + 1)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--lr", type=float, default=1e-2)
    sub.add_argument("--steps", type=int, default=60000)
    sub.add_argument("--init-scale", type=float, default=0.5)
    sub.add_argument("--strategy", choices=tuple(_STRATEGIES),
                     default="auto")
    sub.set_defaults(func=_cmd_demo_corollary1)

    return parser


def _error_line(err: Exception) -> str:
    return " ".join(str(err).split())


def _exit_code(err: RelusetError) -> int:
    for kind, code in _EXIT_CODES:
        if isinstance(err, kind):
            return code
    return 2


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RelusetError as err:
        print(_error_line(err), file=sys.stderr)
        return _exit_code(err)
    except OSError as err:
        print(f"IO_ERROR: {_error_line(err)}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
