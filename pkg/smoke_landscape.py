"""Dev smoke for landscape: GD baseline, slice grids, nonincreasing demo."""
import math

import numpy as np

from reluset import arrangement, dual_polytope
from reluset.arrangement import Dataset, MODE_INTERPOLATION, MODE_REGRESSION
from reluset.config import DEFAULTS
from reluset.errors import (Diverged, NoConvergence, NotNearOptimal,
                            PreconditionViolated, ShapeMismatch, WidthTooSmall)
from reluset.interpolators import builtin_example, default_probe_grid, eval_model
from reluset.landscape import (GDConfig, LandscapeGrid, landscape_slice,
                               nonincreasing_demo, random_network,
                               slice_network, train_nonconvex_gd)
from reluset.transport import NetworkParams, network_objective, params_equal

R3 = math.sqrt(3.0)


def expect(exc, fn, label):
    try:
        fn()
    except exc as e:
        print(f"  ok: {label}: {e}")
        return
    raise AssertionError(f"{label}: expected {exc.__name__}")


def example1():
    return Dataset(np.array([[-R3], [R3]]), np.array([1.0, 1.0]), beta=0.1,
                   mode=MODE_REGRESSION, has_bias=True)


def optimum_of(ds):
    basis = arrangement.enumerate_patterns(ds, DEFAULTS)
    return dual_polytope.build_polytope(ds, basis, DEFAULTS).optimal_value


def grad_check():
    rng = np.random.default_rng(7)
    ds = Dataset(rng.normal(size=(4, 2)), rng.normal(size=4), beta=0.3,
                 mode=MODE_REGRESSION, has_bias=True, has_skip=True)
    from reluset.landscape import _descend
    W0 = rng.normal(size=(3, 3))
    a0 = rng.normal(size=3)
    s0 = rng.normal(size=3)

    def cost(W, a, sk):
        _, _, _, tr, _ = _descend(ds, W, a, sk, 0.0, 0)
        return tr[0]

    # one analytic step vs finite differences
    W1, a1, s1, _, _ = _descend(ds, W0, a0, s0, 1e-6, 1)
    gW = (W0 - W1) / 1e-6
    ga = (a0 - a1) / 1e-6
    gs = (s0 - s1) / 1e-6
    eps = 1e-6
    for (arr, g, name) in ((W0, gW, "W"), (a0, ga, "a"), (s0, gs, "skip")):
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            up = arr.copy(); up[idx] += eps
            dn = arr.copy(); dn[idx] -= eps
            if name == "W":
                fd = (cost(up, a0, s0) - cost(dn, a0, s0)) / (2 * eps)
            elif name == "a":
                fd = (cost(W0, up, s0) - cost(W0, dn, s0)) / (2 * eps)
            else:
                fd = (cost(W0, a0, up) - cost(W0, a0, dn)) / (2 * eps)
            assert abs(fd - g[idx]) <= 1e-4 * (1 + abs(fd)), (name, idx, fd, g[idx])
    print("  ok: analytic gradient matches finite differences")


def gd_config_checks():
    expect(PreconditionViolated, lambda: GDConfig(m=0), "m=0 rejected")
    expect(PreconditionViolated, lambda: GDConfig(m=2, lr=-1e-3), "lr<0 rejected")
    expect(PreconditionViolated, lambda: GDConfig(m=2, steps=-1), "steps<0 rejected")
    expect(PreconditionViolated, lambda: GDConfig(m=2, beta=0.0), "beta=0 rejected")
    ds = example1()
    params, trace = train_nonconvex_gd(ds, GDConfig(m=3, lr=0.0, steps=50, seed=1))
    start = random_network(ds, 3, seed=1)
    assert params_equal(params, start), "lr=0 must leave parameters unchanged"
    assert np.all(trace == trace[0]) and trace.size == 51, "lr=0 trace constant"
    print("  ok: lr=0 leaves parameters and cost unchanged (51 trace entries)")
    # determinism
    p2, t2 = train_nonconvex_gd(ds, GDConfig(m=3, lr=1e-2, steps=200, seed=5))
    p3, t3 = train_nonconvex_gd(ds, GDConfig(m=3, lr=1e-2, steps=200, seed=5))
    assert params_equal(p2, p3) and np.array_equal(t2, t3), "seeded determinism"
    print("  ok: identical seeds reproduce parameters and trace bitwise")
    expect(PreconditionViolated,
           lambda: train_nonconvex_gd(
               Dataset(np.array([[-R3], [R3]]), np.array([0.5, 1.5]),
                       mode=MODE_INTERPOLATION, has_bias=True),
               GDConfig(m=3)),
           "interpolation dataset without explicit beta rejected")


def example1_training():
    ds = example1()
    finals = []
    for seed in range(10):
        params, trace = train_nonconvex_gd(
            ds, GDConfig(m=3, lr=1e-2, steps=20000, seed=seed))
        assert abs(network_objective(params, ds) - trace[-1]) <= 1e-12
        finals.append(trace[-1])
    finals = np.asarray(finals)
    assert np.all(finals >= 0.0975 - 1e-9), finals.min()
    hits = int(np.sum(finals <= 0.0975 + 1e-3))
    assert hits >= 1, finals
    print(f"  ok: 10 seeds, finals in [{finals.min():.8f}, {finals.max():.8f}], "
          f"{hits} within 1e-3 of 0.0975")
    for seed in range(5):
        _, tr = train_nonconvex_gd(ds, GDConfig(m=3, lr=1e-3, steps=3000, seed=seed))
        assert np.all(np.diff(tr) <= 1e-12), f"seed {seed} trace not monotone"
    print("  ok: lr=1e-3 traces nonincreasing across 5 seeds")


def example2_training():
    ex = builtin_example("example2")
    ds = ex.dataset
    reg = Dataset(ds.X, ds.y, beta=0.1, mode=MODE_REGRESSION, has_bias=True)
    opt = optimum_of(reg)
    probes = default_probe_grid(reg)
    finals, fns = [], []
    for seed in range(20):
        params, trace = train_nonconvex_gd(
            ds, GDConfig(m=10, beta=0.1, lr=2e-4, steps=20000, seed=seed))
        finals.append(trace[-1])
        fns.append(eval_model(params, probes, reg))
    finals = np.asarray(finals)
    assert np.all(finals >= opt - 1e-9), (finals.min(), opt)
    best = np.sort(finals)[:3]
    diffs = [np.abs(fns[i] - fns[j]).max()
             for i in range(20) for j in range(i + 1, 20)]
    npair = sum(1 for d in diffs if d > 1e-2)
    assert npair >= 1, "no pair of seeds differs by > 1e-2"
    print(f"  ok: 20 seeds all >= optimum {opt:.6f} (min final {finals.min():.6f}, "
          f"best three {np.round(best, 4)}), {npair} pairs differ > 1e-2")
    expect(Diverged,
           lambda: train_nonconvex_gd(ds, GDConfig(m=10, beta=0.1, lr=10.0,
                                                   steps=2000, seed=0)),
           "huge lr diverges")


def slice_checks():
    # M1: unique optimum near (0, r)
    g1 = landscape_slice("M1")
    r = math.sqrt(0.95)
    t_step = g1.t_values[1] - g1.t_values[0]
    s_step = g1.s_values[1] - g1.s_values[0]
    tmin, smin = g1.argmin()
    assert abs(g1.min_value - 0.0975) <= 1e-3, g1.min_value
    assert abs(tmin) <= t_step + 1e-12 and abs(smin - r) <= s_step + 1e-12, (tmin, smin)
    near = np.argwhere(g1.values <= g1.min_value + 1e-6)
    for i, j in near:
        assert abs(g1.t_values[i]) <= t_step + 1e-12
        assert abs(g1.s_values[j] - r) <= s_step + 1e-12
    print(f"  ok: M1 argmin ({tmin:.4f}, {smin:.4f}) within one cell of (0, {r:.5f}); "
          f"{len(near)} near-minimal points all local")
    # M1 symmetry in t
    g1m = landscape_slice("M1", t_values=-g1.t_values[::-1])
    assert np.allclose(g1.values, g1m.values[::-1], rtol=0, atol=1e-13)
    print("  ok: M1 grid satisfies F(t,s) = F(-t,s)")

    # M2: isolated optimum (0, 0.5) plus the half-line s=0, t>=0
    g2 = landscape_slice("M2")
    t_step = g2.t_values[1] - g2.t_values[0]
    s_step = g2.s_values[1] - g2.s_values[0]
    assert abs(g2.min_value - 0.0975) <= 1e-3
    box = (np.abs(g2.t_values)[:, None] <= t_step + 1e-12) \
        & (np.abs(g2.s_values - 0.5)[None, :] <= s_step + 1e-12)
    assert g2.values[box].min() <= 0.0975 + 1e-3, g2.values[box].min()
    line = (g2.t_values[:, None] >= -t_step - 1e-12) \
        & (np.abs(g2.s_values)[None, :] <= s_step + 1e-12)
    assert g2.values[line].min() <= 0.0975 + 1e-9
    near = np.argwhere(g2.values <= g2.min_value + 1e-6)
    for i, j in near:
        t, s = g2.t_values[i], g2.s_values[j]
        on_point = abs(t) <= t_step + 1e-12 and abs(s - 0.5) <= s_step + 1e-12
        on_line = t >= -t_step - 1e-12 and abs(s) <= s_step + 1e-12
        assert on_point or on_line, (t, s)
    print(f"  ok: M2 minima at (0, 0.5) and along s=0, t>=0 "
          f"({len(near)} near-minimal points, min {g2.min_value:.8f})")

    # M3: the two half-lines
    g3 = landscape_slice("M3")
    t_step = g3.t_values[1] - g3.t_values[0]
    s_step = g3.s_values[1] - g3.s_values[0]
    assert abs(g3.min_value - 0.0975) <= 1e-3
    line_s0 = (g3.t_values[:, None] >= -t_step - 1e-12) \
        & (np.abs(g3.s_values)[None, :] <= s_step + 1e-12)
    line_t0 = (np.abs(g3.t_values)[:, None] <= t_step + 1e-12) \
        & (g3.s_values[None, :] >= -s_step - 1e-12)
    assert g3.values[line_s0].min() <= 0.0975 + 1e-3
    assert g3.values[line_t0].min() <= 0.0975 + 1e-3
    near = np.argwhere(g3.values <= g3.min_value + 1e-6)
    for i, j in near:
        t, s = g3.t_values[i], g3.s_values[j]
        on_s0 = t >= -t_step - 1e-12 and abs(s) <= s_step + 1e-12
        on_t0 = abs(t) <= t_step + 1e-12 and s >= -s_step - 1e-12
        assert on_s0 or on_t0, (t, s)
    print(f"  ok: M3 minima along both half-lines ({len(near)} near-minimal points)")

    # cross-check grids against actual network objectives
    ds = example1()
    rng = np.random.default_rng(3)
    for sid, g in (("M1", g1), ("M2", g2), ("M3", g3)):
        for _ in range(5):
            i = int(rng.integers(g.t_values.size))
            j = int(rng.integers(g.s_values.size))
            params = slice_network(sid, g.t_values[i], g.s_values[j])
            assert abs(network_objective(params, ds) - g.values[i, j]) <= 1e-12
    print("  ok: slice grids match network_objective exactly at random coordinates")
    expect(PreconditionViolated, lambda: landscape_slice("M4"), "unknown slice id")
    expect(PreconditionViolated, lambda: landscape_slice("M1", beta=2.5),
           "beta outside (0, 2)")


def demo_checks():
    ds = example1()
    root = math.sqrt(0.95)
    target = NetworkParams(np.array([[0.0, root], [0.0, 0.0], [0.0, 0.0]]),
                           np.array([root, 0.0, 0.0]))
    opt = optimum_of(ds)
    done = None
    for seed in range(5):
        start = random_network(ds, 3, seed=seed)
        try:
            path = nonincreasing_demo(ds, start, target)
        except (NotNearOptimal, NoConvergence) as e:
            print(f"  note: seed {seed} did not reach the optimum ({e})")
            continue
        objs = np.array([network_objective(p, ds) for _, p in path.samples])
        worst = float(np.diff(objs).max(initial=0.0))
        assert worst <= DEFAULTS.tol_path, worst
        assert params_equal(path.end, target)
        assert params_equal(path.start, start)
        assert abs(objs[-1] - opt) <= 1e-9
        ts = [t for t, _ in path.samples]
        assert all(b > a for a, b in zip(ts, ts[1:])), "t must strictly increase"
        kinds = [seg.kind for seg in path.segments]
        print(f"  ok: seed {seed} path has {len(path.samples)} samples, "
              f"worst increase {worst:.2e}, start cost {objs[0]:.4f} -> {objs[-1]:.6f}")
        print(f"      segments: {kinds[:4]} ... ({len(kinds)} total)")
        done = path
        break
    assert done is not None, "no seed produced a monotone demo path"

    const = nonincreasing_demo(ds, target, target)
    assert all(params_equal(p, target) for _, p in const.samples)
    assert len(const.samples) >= DEFAULTS.min_path_samples
    print(f"  ok: start = target gives a constant path ({len(const.samples)} samples)")

    expect(WidthTooSmall,
           lambda: nonincreasing_demo(
               ds, random_network(ds, 2, seed=0),
               NetworkParams(np.array([[0.0, root], [0.0, 0.0]]),
                             np.array([root, 0.0]))),
           "m=2 precondition")
    expect(ShapeMismatch,
           lambda: nonincreasing_demo(ds, random_network(ds, 4, seed=0), target),
           "width mismatch")
    expect(PreconditionViolated,
           lambda: nonincreasing_demo(
               Dataset(np.array([[-R3], [R3]]), np.array([1.0, 1.0]),
                       mode=MODE_INTERPOLATION, has_bias=True),
               random_network(ds, 3, seed=0), target),
           "interpolation dataset rejected")


def main():
    print("gradient check:")
    grad_check()
    print("GDConfig:")
    gd_config_checks()
    print("training on the mirror dataset:")
    example1_training()
    print("training on the five-point dataset:")
    example2_training()
    print("landscape slices:")
    slice_checks()
    print("nonincreasing demo:")
    demo_checks()
    print("ALL LANDSCAPE SMOKE CHECKS PASSED")


if __name__ == "__main__":
    main()
