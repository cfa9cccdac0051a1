"""Gradient-descent baseline, landscape slice grids, and a monotone path demo.

Three jobs live here.  First, plain full-batch gradient descent on the
nonconvex two-layer objective: the empirical baseline whose final costs
the convex machinery certifies from below.  Second, closed-form
two-dimensional sections of the loss landscape on the two-point mirror
dataset, evaluated as dense grids for contour inspection.  Third, a
constructive demonstration that a wide-enough network can ride gradient
descent to a near-stationary point and then continue to any chosen
optimal network without the objective ever increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import arrangement, dual_polytope
from .arrangement import MODE_REGRESSION, Dataset
from .config import Config, DEFAULTS
from .convex_core import skip_basis
from .errors import (Diverged, NoConvergence, NotNearOptimal,
                     PreconditionViolated, ShapeMismatch, WidthTooSmall)
from .transport import (AUTO, NetworkParams, ParameterPath, PathEvent,
                        PathSegmentInfo, _canonical_pattern_index,
                        _constant_path, connect, network_objective,
                        params_equal, phi)

__all__ = [
    "GDConfig",
    "LandscapeGrid",
    "SLICE_IDS",
    "landscape_slice",
    "nonincreasing_demo",
    "random_network",
    "slice_network",
    "train_nonconvex_gd",
]

SLICE_IDS = ("M1", "M2", "M3")

# Plot windows per slice: (t_lo, t_hi), (s_lo, s_hi).  The M2 window is
# widened past s = 0.5 so that the isolated optimum at (0, 0.5) sits in
# the interior of the default grid instead of beyond its edge.
_SLICE_RANGES = {
    "M1": ((-1.0, 1.0), (-0.5, 2.0)),
    "M2": ((-0.25, 0.6), (-0.5, 0.75)),
    "M3": ((-0.5, 1.0), (-0.5, 1.0)),
}


# ---------------------------------------------------------------------------
# Gradient-descent baseline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GDConfig:
    """Hyperparameters of the full-batch gradient-descent baseline.

    ``beta`` is the weight-decay strength of the training objective;
    ``None`` takes the dataset's own value.  Interpolation datasets have
    no finite-descent objective of their own, so training one requires
    an explicit small ``beta`` (the standard small-decay protocol).
    ``lr = 0`` is allowed and leaves the parameters untouched.
    """

    m: int
    beta: float | None = None
    lr: float = 1e-2
    steps: int = 20000
    seed: int = 0
    init_scale: float = 0.5

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise PreconditionViolated(f"width must be a positive integer, got {self.m!r}")
        if self.beta is not None and not (float(self.beta) > 0.0):
            raise PreconditionViolated(f"beta must be positive, got {self.beta!r}")
        if not (float(self.lr) >= 0.0) or not math.isfinite(float(self.lr)):
            raise PreconditionViolated(f"learning rate must be finite and >= 0, got {self.lr!r}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise PreconditionViolated(f"step count must be a nonnegative integer, got {self.steps!r}")
        if not (float(self.init_scale) >= 0.0):
            raise PreconditionViolated(f"init scale must be >= 0, got {self.init_scale!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "seed", int(self.seed))


def random_network(dataset: Dataset, m: int, seed: int = 0,
                   init_scale: float = 0.5) -> NetworkParams:
    """I.i.d. uniform[-init_scale, init_scale] network of width m.

    The draw order (first layer, then amplitudes, then the skip block
    when the dataset has one) is fixed, so a seed fully determines the
    result.  This is the initializer used by :func:`train_nonconvex_gd`.
    """
    rng = np.random.default_rng(seed)
    d = dataset.d_eff
    W = rng.uniform(-init_scale, init_scale, size=(int(m), d))
    a = rng.uniform(-init_scale, init_scale, size=int(m))
    skip = rng.uniform(-init_scale, init_scale, size=d) if dataset.has_skip else None
    return NetworkParams(W, a, skip)


def _training_dataset(dataset: Dataset, gd_config: GDConfig) -> Dataset:
    """The regression problem a GD run actually optimizes."""
    if dataset.mode != MODE_REGRESSION and gd_config.beta is None:
        raise PreconditionViolated(
            "gradient descent trains the regression objective; interpolation "
            "data needs an explicit small GDConfig.beta")
    beta = dataset.beta if gd_config.beta is None else float(gd_config.beta)
    if dataset.mode == MODE_REGRESSION and beta == dataset.beta:
        return dataset
    return Dataset(dataset.X, dataset.y, beta=beta, mode=MODE_REGRESSION,
                   has_bias=dataset.has_bias, has_skip=dataset.has_skip)


def _descend(dataset: Dataset, W, a, skip, lr: float, steps: int,
             snapshot_every: int = 0, grad_stop: float = 0.0):
    """Full-batch gradient descent from the given parameter arrays.

    Returns the final arrays, the per-step cost trace (cost before the
    first step through cost after the last), and the recorded snapshots
    as (step, NetworkParams) pairs when ``snapshot_every`` is positive.
    The ReLU subgradient at zero is taken as zero.  ``grad_stop`` ends
    the run early once the sup-norm of the gradient falls below it; the
    public trainer leaves it at zero so the trace length is determined
    by the configuration alone.
    """
    Xe = dataset.effective_design
    y = dataset.y
    beta = dataset.effective_beta
    W = np.array(W, dtype=float)
    a = np.array(a, dtype=float).ravel()
    skip = None if skip is None else np.array(skip, dtype=float).ravel()
    trace = []
    snaps = []

    def record(step):
        snaps.append((step, NetworkParams(
            W.copy(), a.copy(), None if skip is None else skip.copy())))

    initial = None
    for step in range(steps + 1):
        pre = Xe @ W.T
        act = np.maximum(pre, 0.0)
        fit = act @ a
        if skip is not None:
            fit = fit + Xe @ skip
        resid = fit - y
        cost = 0.5 * float(resid @ resid) + 0.5 * beta * (
            float(np.sum(W * W)) + float(a @ a))
        trace.append(cost)
        if initial is None:
            initial = cost
        if not math.isfinite(cost) or cost > 1e6 * max(initial, 1e-12):
            raise Diverged(
                f"objective {cost:.6e} at step {step} exceeds 1e6 x the "
                f"initial value {initial:.6e}")
        if snapshot_every and step % snapshot_every == 0:
            record(step)
        if step == steps:
            break
        g_a = act.T @ resid + beta * a
        g_W = ((pre > 0.0) * resid[:, None]).T @ Xe * a[:, None] + beta * W
        g_skip = None if skip is None else Xe.T @ resid
        if grad_stop:
            g_inf = max(float(np.abs(g_W).max(initial=0.0)),
                        float(np.abs(g_a).max(initial=0.0)),
                        0.0 if g_skip is None else float(np.abs(g_skip).max(initial=0.0)))
            if g_inf <= grad_stop:
                break
        W -= lr * g_W
        a -= lr * g_a
        if skip is not None:
            skip -= lr * g_skip
    if snapshot_every and (not snaps or snaps[-1][0] != len(trace) - 1):
        record(len(trace) - 1)
    return W, a, skip, np.asarray(trace), snaps


def train_nonconvex_gd(dataset: Dataset, config: GDConfig):
    """Train the two-layer network by plain full-batch gradient descent.

    Returns ``(params, trace)``: the final parameters and the objective
    value before the first step through after the last (``steps + 1``
    entries).  Deterministic given the configuration: the initializer
    is :func:`random_network` with the configured seed and scale.

    Raises Diverged when the objective exceeds one million times its
    initial value, and PreconditionViolated for an interpolation
    dataset without an explicit training ``beta``.
    """
    train_ds = _training_dataset(dataset, config)
    start = random_network(train_ds, config.m, config.seed, config.init_scale)
    W, a, skip, trace, _ = _descend(
        train_ds, start.weights, start.amplitudes, start.skip,
        float(config.lr), config.steps)
    return NetworkParams(W, a, skip), trace


# ---------------------------------------------------------------------------
# Landscape slice grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LandscapeGrid:
    """A dense grid of objective values over one landscape section.

    ``values[i, j]`` is the objective at ``(t_values[i], s_values[j])``.
    """

    slice_id: str
    beta: float
    t_values: np.ndarray = field(repr=False)
    s_values: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    def argmin(self):
        """(t, s) of the smallest grid value."""
        i, j = np.unravel_index(int(np.argmin(self.values)), self.values.shape)
        return float(self.t_values[i]), float(self.s_values[j])


def _mirror_design():
    root3 = math.sqrt(3.0)
    X = np.array([[-root3, 1.0], [root3, 1.0]])
    return X, np.ones(2)


def _slice_frames(slice_id: str, beta: float):
    """The (U, v) parameter frame of one slice as a callable of (t, s).

    Every slice reparametrizes the width-m objective
    L(U, v) = 0.5 ||(X U)_+ v - y||^2 + beta/2 (||U||_F^2 + ||v||^2)
    with U holding one neuron per column.  ``r`` is the balanced norm
    sqrt(1 - beta/2) of a single bias neuron fitting the mirror data.
    """
    r = math.sqrt(1.0 - 0.5 * beta)
    root2 = math.sqrt(2.0)
    q = r / (2.0 * root2)
    p = math.sqrt(3.0) * q

    if slice_id == "M1":
        v = np.array([r])

        def frame(t, s):
            return np.array([[t], [s]]), v

        return frame

    if slice_id == "M2":
        U0 = np.array([[0.0, 0.0], [r, 0.0]])
        U1 = np.array([[p, -p], [q, q]])
        U2 = np.array([[0.0, 0.0], [0.0, r]])
        v0 = np.array([r, 0.0])
        v1 = np.array([r / root2, r / root2])
        v2 = np.array([0.0, r])

        def frame(t, s):
            ct, st = math.cos(t), math.sin(t)
            return (ct * U0 + 2.0 * s * (U1 - U0) + st * U2,
                    ct * v0 + 2.0 * s * (v1 - v0) + st * v2)

        return frame

    U0 = np.array([[0.0, 0.0, 0.0], [r, 0.0, 0.0]])
    U1 = np.array([[0.0, p, -p], [0.0, q, q]])
    U2 = np.array([[0.0, 0.0, 0.0], [0.0, r, 0.0]])
    v0 = np.array([r, 0.0, 0.0])
    v1 = np.array([0.0, r / root2, r / root2])
    v2 = np.array([0.0, r, 0.0])

    def frame(t, s):
        cc, cs, st = math.cos(t) * math.cos(s), math.cos(t) * math.sin(s), math.sin(t)
        return (cc * U0 + cs * U1 + st * U2,
                cc * v0 + cs * v1 + st * v2)

    return frame


def _check_slice_args(slice_id, beta):
    sid = str(slice_id).upper()
    if sid not in _SLICE_RANGES:
        raise PreconditionViolated(
            f"unknown slice {slice_id!r}; choose one of {', '.join(SLICE_IDS)}")
    beta = float(beta)
    if not (0.0 < beta < 2.0):
        raise PreconditionViolated(
            f"beta must lie in (0, 2) so the balanced norm sqrt(1 - beta/2) "
            f"is a positive real, got {beta!r}")
    return sid, beta


def _axis_values(explicit, lo, hi, resolution):
    if explicit is not None:
        vals = np.asarray(explicit, dtype=float).ravel()
        if vals.size == 0 or not np.all(np.isfinite(vals)):
            raise PreconditionViolated("grid axis values must be finite and nonempty")
        return vals
    return np.linspace(lo, hi, resolution)


def landscape_slice(slice_id: str, beta: float = 0.1, t_values=None,
                    s_values=None, resolution: int = 81) -> LandscapeGrid:
    """Evaluate one two-dimensional landscape section as a dense grid.

    The slices reparametrize the width-1, width-2, and width-3
    objectives on the mirror dataset; the default windows contain the
    complete optimal locus of each (the single optimum of M1, the
    isolated point plus half-line of M2, the two half-lines of M3).
    Explicit ``t_values`` / ``s_values`` arrays override the defaults.
    """
    sid, beta = _check_slice_args(slice_id, beta)
    if int(resolution) != resolution or resolution < 2:
        raise PreconditionViolated(f"resolution must be an integer >= 2, got {resolution!r}")
    (t_lo, t_hi), (s_lo, s_hi) = _SLICE_RANGES[sid]
    ts = _axis_values(t_values, t_lo, t_hi, int(resolution))
    ss = _axis_values(s_values, s_lo, s_hi, int(resolution))
    X, y = _mirror_design()
    frame = _slice_frames(sid, beta)
    values = np.empty((ts.size, ss.size))
    for i, t in enumerate(ts):
        for j, s in enumerate(ss):
            U, v = frame(float(t), float(s))
            fit = np.maximum(X @ U, 0.0) @ v
            values[i, j] = 0.5 * float(np.sum((fit - y) ** 2)) + 0.5 * beta * (
                float(np.sum(U * U)) + float(v @ v))
    return LandscapeGrid(sid, beta, ts, ss, values)


def slice_network(slice_id: str, t: float, s: float,
                  beta: float = 0.1) -> NetworkParams:
    """The network a slice coordinate (t, s) stands for.

    Evaluating :func:`transport.network_objective` on the returned
    parameters over the mirror dataset reproduces the grid value
    exactly; this is the cross-check that keeps the closed-form grids
    honest.
    """
    sid, beta = _check_slice_args(slice_id, beta)
    U, v = _slice_frames(sid, beta)(float(t), float(s))
    return NetworkParams(U.T, v)


# ---------------------------------------------------------------------------
# Nonincreasing path demonstration
# ---------------------------------------------------------------------------

def _lerp_params(a: NetworkParams, b: NetworkParams, s: float) -> NetworkParams:
    skip = None
    if a.skip is not None and b.skip is not None:
        skip = (1.0 - s) * a.skip + s * b.skip
    return NetworkParams((1.0 - s) * a.weights + s * b.weights,
                         (1.0 - s) * a.amplitudes + s * b.amplitudes, skip)


def _snap_to_optimal(theta: NetworkParams, dataset: Dataset, polytope,
                     config: Config):
    """Project a near-stationary network onto the optimal set.

    Tiny neurons are zeroed; each surviving neuron is classified by its
    own activation pattern and amplitude sign, which must name an
    active generator; the accumulated per-generator masses receive a
    least-squares correction restricted to that support so the fit is
    exact; and each neuron is rebuilt balanced on its generator
    direction with the corrected mass split in proportion to the
    trained one.  Slot positions never change, so the straight line
    from the input to the result is a short seam.
    """
    basis = polytope.basis
    scale = 1.0 + float(np.abs(dataset.y).max(initial=0.0))
    masses = np.linalg.norm(theta.weights, axis=1) * np.abs(theta.amplitudes)
    prune_tol = 1e-7 * scale
    pruned = theta.copy()
    alive = []
    for j in range(theta.width):
        if masses[j] <= prune_tol:
            pruned.weights[j] = 0.0
            pruned.amplitudes[j] = 0.0
        else:
            alive.append(j)

    K = len(polytope.generators)
    slot_key = {}
    c_est = np.zeros(K)
    for j in alive:
        idx = _canonical_pattern_index(pruned.weights[j], dataset, basis)
        side = "u" if pruned.amplitudes[j] > 0 else "v"
        try:
            k = polytope.key_of(idx, side)
        except KeyError:
            raise NoConvergence(
                f"a trained neuron carries mass {masses[j]:.3e} on an "
                "activation pattern no optimal network uses") from None
        slot_key[j] = k
        c_est[k] += masses[j]

    G = polytope.generator_matrix
    y_star = polytope.y_star
    if polytope.has_skip:
        Q = skip_basis(dataset)
        Gp = G - Q @ (Q.T @ G)
        yp = y_star - Q @ (Q.T @ y_star)
    else:
        Gp, yp = G, y_star

    c = np.zeros(K)
    support = np.array(sorted(set(slot_key.values())), dtype=int)
    if support.size:
        cS = c_est[support]
        for _ in range(2):
            pos = cS > 0.0
            if not pos.any():
                break
            delta, *_ = np.linalg.lstsq(
                Gp[:, support[pos]], yp - Gp[:, support[pos]] @ cS[pos], rcond=None)
            cS[pos] += delta
            if cS.min() < -1e-6 * scale:
                raise NoConvergence(
                    "the descent endpoint does not project onto the optimal set "
                    f"(coefficient correction reaches {cS.min():.3e})")
            cS = np.maximum(cS, 0.0)
        c[support] = cS
    miss = float(np.abs(Gp @ c - yp).max(initial=0.0))
    if miss > 1e-8 * scale:
        raise NoConvergence(
            f"the activation patterns found by descent miss the optimal fit "
            f"by {miss:.3e}")

    exact = pruned.copy()
    for k in set(slot_key.values()):
        slots = [j for j in alive if slot_key[j] == k]
        total = sum(masses[j] for j in slots)
        gen = polytope.generators[k]
        sign = 1.0 if gen.side == "u" else -1.0
        for j in slots:
            share = c[k] * masses[j] / total
            root = math.sqrt(share)
            exact.weights[j] = gen.direction * root
            exact.amplitudes[j] = sign * root
    if polytope.has_skip:
        Xe = dataset.effective_design
        exact.skip, *_ = np.linalg.lstsq(Xe, y_star - G @ c, rcond=None)

    drift = abs(network_objective(exact, dataset) - polytope.optimal_value)
    if drift > 1e-7 * scale:
        raise NoConvergence(
            f"the snapped network misses the optimal objective by {drift:.3e}")
    return pruned, exact


def _compose_demo_path(gd_snaps, theta_gd, theta_pruned, theta_exact,
                       tail: ParameterPath) -> ParameterPath:
    """Concatenate GD iterates, the two snap seams, and the optimal path."""
    T_GD, T_PRUNE, T_SNAP = 0.40, 0.44, 0.50
    samples = []
    events = [PathEvent("gradient-descent", 0.0,
                        f"{gd_snaps[-1][0]} steps recorded")]
    segments = [
        PathSegmentInfo(0.0, T_GD, "gradient-descent",
                        f"{len(gd_snaps)} iterates"),
        PathSegmentInfo(T_GD, T_PRUNE, "prune-seam", "zero tiny neurons"),
        PathSegmentInfo(T_PRUNE, T_SNAP, "snap-seam",
                        "balance onto generator directions"),
    ]
    if len(gd_snaps) == 1:
        samples.append((0.0, gd_snaps[0][1]))
    else:
        last = gd_snaps[-1][0]
        for step, params in gd_snaps:
            samples.append((T_GD * step / last, params))
    events.append(PathEvent("prune", T_GD, "drop below-threshold neurons"))
    for s in np.linspace(0.0, 1.0, 17)[1:]:
        samples.append((T_GD + (T_PRUNE - T_GD) * float(s),
                        _lerp_params(theta_gd, theta_pruned, float(s))))
    events.append(PathEvent("snap", T_PRUNE, "project onto the optimal set"))
    for s in np.linspace(0.0, 1.0, 33)[1:]:
        samples.append((T_PRUNE + (T_SNAP - T_PRUNE) * float(s),
                        _lerp_params(theta_pruned, theta_exact, float(s))))
    for t, params in tail.samples[1:]:
        samples.append((T_SNAP + (1.0 - T_SNAP) * float(t), params))
    samples[-1] = (1.0, tail.samples[-1][1])
    for ev in tail.events:
        events.append(PathEvent(ev.kind, T_SNAP + (1.0 - T_SNAP) * ev.time,
                                ev.detail))
    for info in tail.segments:
        segments.append(PathSegmentInfo(T_SNAP + (1.0 - T_SNAP) * info.start,
                                        T_SNAP + (1.0 - T_SNAP) * info.end,
                                        info.kind, info.detail))
    return ParameterPath(samples=tuple(samples), events=tuple(events),
                         segments=tuple(segments))


def nonincreasing_demo(dataset: Dataset, start: NetworkParams,
                       target: NetworkParams, gd_config: GDConfig | None = None,
                       strategy: str = AUTO,
                       config: Config = DEFAULTS) -> ParameterPath:
    """Descend from ``start`` by gradient descent, then ride the optimal set.

    The returned path concatenates the recorded GD trajectory, two short
    seams (pruning the tiny neurons, then balancing the survivors onto
    their generator directions), and a :func:`transport.connect` path to
    ``target``.  The sampled objective sequence is checked to be
    nonincreasing within the path tolerance before the path is returned.

    Requires width at least n + 1, a regression dataset, and an optimal
    ``target``.  Raises NotNearOptimal when gradient descent stalls more
    than ten path-tolerances above the optimum, and propagates connect
    errors for the final leg.
    """
    if dataset.mode != MODE_REGRESSION:
        raise PreconditionViolated(
            "the path demonstration runs on the regression objective; "
            "rebuild interpolation data with a small beta")
    if start.weights.shape[1] != dataset.d_eff:
        raise ShapeMismatch(
            f"start weights have {start.weights.shape[1]} columns, the "
            f"effective design has {dataset.d_eff}")
    if target.width != start.width:
        raise ShapeMismatch(
            f"widths differ: start {start.width}, target {target.width}")
    m = start.width
    if m < dataset.n + 1:
        raise WidthTooSmall(
            f"the nonincreasing-path construction needs width at least "
            f"n + 1 = {dataset.n + 1}, got {m}")
    if gd_config is None:
        gd_config = GDConfig(m=m, lr=1e-2, steps=60000)
    if gd_config.m != m:
        raise PreconditionViolated(
            f"gd_config.m = {gd_config.m} does not match the start width {m}")
    if gd_config.beta is not None and gd_config.beta != dataset.beta:
        raise PreconditionViolated(
            "the demonstration trains the dataset's own objective; leave "
            "gd_config.beta unset")

    basis = arrangement.enumerate_patterns(dataset, config)
    polytope = dual_polytope.build_polytope(dataset, basis, config)
    opt = polytope.optimal_value
    dual_polytope.decompose(polytope, phi(target, dataset, basis, config), config)
    if params_equal(start, target):
        return _constant_path(start, config)

    scale = 1.0 + float(np.abs(dataset.y).max(initial=0.0))
    snapshot_every = max(1, gd_config.steps // 160)
    W, a, skip, trace, snaps = _descend(
        dataset, start.weights, start.amplitudes, start.skip,
        float(gd_config.lr), gd_config.steps,
        snapshot_every=snapshot_every, grad_stop=1e-12 * scale)
    theta_gd = NetworkParams(W, a, skip)
    if trace[-1] > opt + 10.0 * config.tol_path:
        raise NotNearOptimal(
            f"gradient descent stalled at {trace[-1]:.9g}, more than "
            f"{10.0 * config.tol_path:.1e} above the optimum {opt:.9g}")

    theta_pruned, theta_exact = _snap_to_optimal(theta_gd, dataset, polytope, config)
    tail = connect(theta_exact, target, dataset, strategy=strategy,
                   config=config, polytope=polytope)
    path = _compose_demo_path(snaps, theta_gd, theta_pruned, theta_exact, tail)

    objs = [network_objective(p, dataset) for _, p in path.samples]
    worst = max((objs[i + 1] - objs[i] for i in range(len(objs) - 1)), default=0.0)
    if worst > config.tol_path:
        raise NoConvergence(
            f"the composed path increases the objective by {worst:.3e} "
            f"between adjacent samples (allowed slack {config.tol_path:.1e})")
    return path
