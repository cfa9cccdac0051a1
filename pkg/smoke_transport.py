import numpy as np

from reluset.arrangement import Dataset, enumerate_patterns
from reluset import dual_polytope as dp
from reluset import convex_core as cc
from reluset import transport as tp
from reluset.errors import (
    NotConnected, NotOptimal, PreconditionViolated, WidthTooSmall,
)

s3 = np.sqrt(3.0)
X1 = np.array([[-s3, 1.0], [s3, 1.0]])
ds1 = Dataset(X=X1, y=np.array([1.0, 1.0]), beta=0.1, mode="reg",
              has_bias=False, has_skip=False)
basis1 = enumerate_patterns(ds1)
poly1 = dp.build_polytope(ds1, basis1)
OPT1 = poly1.optimal_value
print("example1 optimal value:", OPT1)
assert abs(OPT1 - 0.0975) < 1e-12

K = len(poly1.generators)
k_top = poly1.key_of(basis1.index_of((1, 1)), "u")
c_star = np.zeros(K); c_star[k_top] = 0.95
k_left = poly1.key_of(basis1.index_of((0, 1)), "u")
k_right = poly1.key_of(basis1.index_of((1, 0)), "u")
c_half = np.zeros(K); c_half[k_left] = 0.475; c_half[k_right] = 0.475

# ---- psi ----
th1 = tp.psi(c_star, poly1, 1)
r = np.sqrt(0.95)
print("psi neuron:", th1.weights[0], th1.amplitudes[0])
assert np.allclose(th1.weights[0], [0.0, r], atol=1e-12)
assert abs(th1.amplitudes[0] - r) < 1e-12
assert abs(r - 0.9746794344808963) < 1e-15
assert th1.skip is None and th1.width == 1 and th1.cardinality == 1
assert abs(tp.network_objective(th1, ds1) - OPT1) < 1e-13
try:
    tp.psi(c_star, poly1, 0); raise AssertionError("no WidthTooSmall")
except WidthTooSmall:
    pass
try:
    tp.psi(-c_star, poly1, 2); raise AssertionError("no PreconditionViolated")
except PreconditionViolated:
    pass

# ---- phi and roundtrips ----
sol = tp.phi(tp.psi(c_star, poly1, 3), ds1, basis1)
c_back = dp.decompose(poly1, sol)
assert np.allclose(c_back, c_star, atol=1e-10), c_back
assert abs(sol.objective - OPT1) < 1e-13
idx = basis1.index_of((1, 1))
assert np.allclose(sol.u[idx], [0.0, 0.95], atol=1e-12)

th2 = tp.psi(c_half, poly1, 2)
assert abs(tp.network_objective(th2, ds1) - OPT1) < 1e-13
sol2 = tp.phi(th2, ds1, basis1)
c2 = dp.decompose(poly1, sol2)
assert np.allclose(c2, c_half, atol=1e-10)

# psi(phi(.)) on a minimal network reproduces it up to slot permutation
th2p = tp.permute_params(th2, [1, 0])
sol2p = tp.phi(th2p, ds1, basis1)
c2p = dp.decompose(poly1, sol2p)
th2pp = tp.psi(c2p, poly1, 2)
masses = lambda t: sorted(
    (round(float(np.linalg.norm(t.weights[j])) * abs(float(t.amplitudes[j])), 9))
    for j in range(t.width))
assert masses(th2pp) == masses(th2p)

# ---- merge_minimal ----
a, b = np.sqrt(0.3), np.sqrt(0.65)
th_two = tp.NetworkParams(np.array([[0.0, a], [0.0, b]]), np.array([a, b]))
assert abs(tp.network_objective(th_two, ds1) - OPT1) < 1e-13
merged, mpath = tp.merge_minimal(th_two, ds1, basis1)
print("merged neuron:", merged.weights[0], merged.amplitudes[0])
assert merged.cardinality == 1
assert np.allclose(merged.weights[0], [0.0, r], atol=1e-12)
assert abs(merged.amplitudes[0] - r) < 1e-12
assert merged.amplitudes[1] == 0.0 and not merged.weights[1].any()
assert tp.params_equal(mpath.start, th_two)
assert tp.params_equal(mpath.end, merged)
kinds = [e.kind for e in mpath.events]
assert tp.MERGE in kinds and tp.CARDINALITY_CHANGE in kinds
devs = [abs(tp.network_objective(p, ds1) - OPT1) for _, p in mpath.samples]
print("merge path max dev:", max(devs), "samples:", len(mpath.samples))
assert max(devs) < 1e-13
ver = tp.verify_path(mpath, ds1, OPT1)
assert ver.passed, ver

mm, mp0 = tp.merge_minimal(th1, ds1, basis1)
assert tp.params_equal(mm, th1) and not mp0.events

# mixed signs stay untouched
t = 0.5
th_mix = tp.NetworkParams(np.array([[0.0, t], [0.0, t]]), np.array([t, -t]))
mmix, pmix = tp.merge_minimal(th_mix, ds1, basis1)
assert tp.params_equal(mmix, th_mix) and not pmix.events

# ---- reduce_support ----
A = [np.array([1.0, 1.0])]
B = [np.array([2.0, 0.0]), np.array([0.0, 2.0]), np.array([1.0, 1.0])]
mu = np.array([0.2, 0.2, 0.15])
lam = np.array([0.55])
mu_star = tp.reduce_support(A, B, [0], lam, mu)
print("reduce_support:", mu_star)
assert int(np.count_nonzero(mu_star)) <= 2
assert np.all(mu_star >= 0)
z = sum(m * v for m, v in zip(mu_star, B))
delta = z[0]  # coordinates w.r.t. A=[(1,1)]
assert np.allclose(z, delta * A[0], atol=1e-12) and delta > 0

mu_same = tp.reduce_support(A, B[:2], [0], lam, np.array([0.275, 0.275]))
assert np.array_equal(mu_same, [0.275, 0.275])
try:
    tp.reduce_support([np.array([1.0, 1.0]), np.array([2.0, 2.0])],
                      B, [0], np.array([0.3, 0.125]), mu)
    raise AssertionError("no PreconditionViolated for dependent family")
except PreconditionViolated:
    pass

# ---- permutation_bridge ----
th3 = tp.psi(c_star, poly1, 3)
bridge = tp.permutation_bridge(th3, [1, 0, 2], poly1)
print("bridge segments:", len(bridge.segments), "samples:", len(bridge.samples))
assert len(bridge.segments) == 3
assert tp.params_equal(bridge.start, th3)
assert tp.params_equal(bridge.end, tp.permute_params(th3, [1, 0, 2]))
assert any(e.kind == tp.PERMUTATION_BRIDGE for e in bridge.events)
assert tp.verify_path(bridge, ds1, OPT1).passed

const = tp.permutation_bridge(th3, [0, 1, 2], poly1)
assert tp.params_equal(const.start, th3) and tp.params_equal(const.end, th3)
assert len({id(s[1]) for s in const.samples}) >= 1 and len(const.samples) >= 200

try:
    tp.permutation_bridge(tp.psi(c_star, poly1, 2), [1, 0], poly1)
    raise AssertionError("no WidthTooSmall at m = M*")
except WidthTooSmall:
    pass

# bridge from a full network (no empty slot): needs the freeing move
th_full = tp.NetworkParams(
    np.array([[0.0, np.sqrt(0.3)], [0.0, np.sqrt(0.3)], [0.0, np.sqrt(0.35)]]),
    np.array([np.sqrt(0.3), np.sqrt(0.3), np.sqrt(0.35)]))
assert abs(tp.network_objective(th_full, ds1) - OPT1) < 1e-13
bfull = tp.permutation_bridge(th_full, [2, 0, 1], poly1)
assert tp.params_equal(bfull.start, th_full)
assert tp.params_equal(bfull.end, tp.permute_params(th_full, [2, 0, 1]))
vfull = tp.verify_path(bfull, ds1, OPT1)
print("full-bridge dev:", vfull.max_objective_deviation,
      "jump:", vfull.max_jump, "segments:", len(bfull.segments))
assert vfull.passed, vfull

# ---- connect: example with m = 3 (AUTO -> bounded-support transfer) ----
thA = tp.psi(c_half, poly1, 3)
thB = tp.permute_params(tp.psi(c_star, poly1, 3), [2, 0, 1])
path = tp.connect(thA, thB, ds1, polytope=poly1)
print("connect m=3 segments:", [s.kind for s in path.segments])
print("connect m=3 events:", [(e.kind, round(e.time, 3)) for e in path.events])
assert tp.params_equal(path.start, thA)
assert tp.params_equal(path.end, thB)
assert len(path.samples) >= 200
v3 = tp.verify_path(path, ds1, OPT1)
print("connect m=3 dev:", v3.max_objective_deviation, "jump:", v3.max_jump,
      "samples:", v3.sample_count)
assert v3.passed and v3.max_objective_deviation <= 1e-6
assert any(e.kind == tp.UPDATE1 for e in path.events)
for (t0, _), (t1, _) in zip(path.samples[:-1], path.samples[1:]):
    assert t1 > t0
assert path.samples[0][0] == 0.0 and path.samples[-1][0] == 1.0

# same endpoints -> constant path
cpath = tp.connect(thA, thA.copy(), ds1, polytope=poly1)
assert all(tp.params_equal(p, thA) for _, p in cpath.samples)
assert len(cpath.samples) >= 200

# strategy SUM_WIDTHS at m = 3 also works
psum = tp.connect(thA, thB, ds1, strategy=tp.SUM_WIDTHS, polytope=poly1)
vsum = tp.verify_path(psum, ds1, OPT1)
print("connect SUM_WIDTHS dev:", vsum.max_objective_deviation)
assert vsum.passed
assert tp.params_equal(psum.start, thA) and tp.params_equal(psum.end, thB)

# m = 2: every route needs three simultaneous neurons -> NotConnected
try:
    tp.connect(tp.psi(c_half, poly1, 2), tp.psi(c_star, poly1, 2), ds1,
               polytope=poly1)
    raise AssertionError("no NotConnected at m = 2")
except NotConnected as e:
    print("m=2:", e)

# explicit N_PLUS_ONE below n+1 -> PreconditionViolated
try:
    tp.connect(tp.psi(c_half, poly1, 2), tp.psi(c_star, poly1, 2), ds1,
               strategy=tp.N_PLUS_ONE, polytope=poly1)
    raise AssertionError("no PreconditionViolated")
except PreconditionViolated:
    pass

# non-optimal endpoint -> NotOptimal
bad = tp.psi(c_star, poly1, 3)
bad.amplitudes = bad.amplitudes * 2.0
try:
    tp.connect(bad, thB, ds1, polytope=poly1)
    raise AssertionError("no NotOptimal")
except NotOptimal:
    pass

# ---- verify_path failure on a corrupted sample ----
samples = list(path.samples)
mid = len(samples) // 2
broken = samples[mid][1].copy()
broken.weights = broken.weights + 0.1
samples[mid] = (samples[mid][0], broken)
vbad = tp.verify_path(tp.ParameterPath(tuple(samples), path.events,
                                       path.segments), ds1, OPT1)
assert not vbad.passed

# ---- zero-generator polytope (skip absorbs everything) ----
ds_skip = Dataset(X=X1, y=np.array([1.0, 1.0]), beta=1.0, mode="interp",
                  has_bias=False, has_skip=True)
basis_s = enumerate_patterns(ds_skip)
poly_s = dp.build_polytope(ds_skip, basis_s)
print("skip polytope generators:", len(poly_s.generators),
      "optimal:", poly_s.optimal_value)
th_s = tp.psi(np.zeros(len(poly_s.generators)), poly_s, 2)
assert th_s.skip is not None
assert np.allclose(tp.network_fit(th_s, ds_skip), ds_skip.y, atol=1e-12)
# a second optimal network: same fit, different slot layout (both zero)
pskip = tp.connect(th_s, th_s.copy(), ds_skip, polytope=poly_s)
assert tp.verify_path(pskip, ds_skip, poly_s.optimal_value).passed

print("transport smoke OK")
