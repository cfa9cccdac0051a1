import numpy as np
import sys
sys.path.insert(0, "tests")
from reluset.arrangement import Dataset, enumerate_patterns, PatternBasis
from reluset import convex_core as cc
from reluset import dual_polytope as dp
from reluset.config import Config
from reluset.errors import NotOptimal, EmptySubset

s3 = np.sqrt(3.0)

# Example 1, beta = 0.1
X1 = np.array([[-s3, 1.0], [s3, 1.0]])
ds1 = Dataset(X=X1, y=np.array([1.0, 1.0]), beta=0.1, mode="reg",
              has_bias=False, has_skip=False)
b1 = enumerate_patterns(ds1)
poly1 = dp.build_polytope(ds1, b1)
print("example1 y*:", poly1.y_star, "value:", poly1.optimal_value)
assert np.allclose(poly1.y_star, [0.95, 0.95], atol=1e-8)
assert np.allclose(poly1.certificate.nu, [-0.05, -0.05], atol=1e-8)
gens = {(b1[g.index].mask, g.side): (g.direction, g.generator) for g in poly1.generators}
print("example1 generators:")
for k, (d, g) in sorted(gens.items()):
    print("  ", k, "dir", np.round(d, 6), "gen", np.round(g, 6))
assert len(poly1.generators) == 3
d11, g11 = gens[((1, 1), "u")]
d10, g10 = gens[((1, 0), "u")]
d01, g01 = gens[((0, 1), "u")]
assert np.allclose(d11, [0.0, 1.0], atol=1e-7)
assert np.allclose(d10, [-s3 / 2, 0.5], atol=1e-7)
assert np.allclose(d01, [s3 / 2, 0.5], atol=1e-7)
assert np.allclose(g11, [1.0, 1.0], atol=1e-7)
assert np.allclose(g10, [2.0, 0.0], atol=1e-7)
assert np.allclose(g01, [0.0, 2.0], atol=1e-7)
# active value at the all-ones pattern: nu . (X ubar) = -beta
assert abs(poly1.certificate.nu @ g11 + 0.1) < 1e-8

# decompose of the solver's own solution
rep1 = cc.solve(ds1, b1)
c1 = dp.decompose(poly1, rep1.solution)
print("example1 decompose:", c1)
k11 = poly1.key_of(b1.index_of((1, 1)), "u")
assert abs(c1[k11] - 0.95) < 1e-7
assert abs(c1.sum() - 0.95) < 1e-7

# perturbed solution must be rejected
bad_u = rep1.solution.u.copy()
bad_u[k11 and 0] = bad_u[0]  # no-op guard
bad = cc.ConvexSolution(u=rep1.solution.u.copy(), v=rep1.solution.v.copy(),
                        skip=None, fit=rep1.solution.fit.copy(), objective=0.0)
i11 = b1.index_of((1, 1))
bad.u[i11] = bad.u[i11] + np.array([1e-2, 0.0])
bad.fit = cc.fit_of(ds1, b1, bad.u, bad.v, bad.skip)
bad.objective = cc.objective(ds1, bad)
try:
    dp.decompose(poly1, bad)
    raise SystemExit("FAIL: perturbed solution accepted")
except NotOptimal as e:
    print("perturbed rejected:", e)

# certificate independence: different penalty parameter, same generators
poly1b = dp.build_polytope(ds1, b1, Config(rho_init=7.0))
assert len(poly1b.generators) == 3
for ga, gb in zip(poly1.generators, poly1b.generators):
    assert ga.index == gb.index and ga.side == gb.side
    assert np.allclose(ga.direction, gb.direction, atol=1e-6)
print("certificate independence OK")

# zero-label dataset: empty polytope
ds0 = Dataset(X=X1, y=np.zeros(2), beta=0.5, mode="reg", has_bias=False, has_skip=False)
poly0 = dp.build_polytope(ds0, enumerate_patterns(ds0))
assert len(poly0.generators) == 0 and np.allclose(poly0.y_star, 0.0)
print("zero-label OK")

# subsampled program
sub = dp.analyze_subsampled(ds1, [b1[i] for i in range(len(b1))])
assert len(sub.generators) == len(poly1.generators)
only10 = dp.analyze_subsampled(ds1, [b1[b1.index_of((1, 0))]])
print("subset {10} generators:", [(b1[g.index].mask, g.side) for g in only10.generators],
      "value:", only10.optimal_value)
assert all(only10.basis[g.index].mask == (1, 0) for g in only10.generators)
try:
    dp.analyze_subsampled(ds1, [])
    raise SystemExit("FAIL: empty subset accepted")
except EmptySubset:
    print("empty subset rejected")

# ce1: three unit-circle points, skip, no bias, interpolation
Xc = np.array([[1.0, 0.0], [-0.5, s3 / 2], [-0.5, -s3 / 2]])
yc = np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])
dsc = Dataset(X=Xc, y=yc, beta=1.0, mode="interp", has_bias=False, has_skip=True)
bc = enumerate_patterns(dsc)
polyc = dp.build_polytope(dsc, bc)
print("ce1 nu:", polyc.certificate.nu, "generators:", len(polyc.generators),
      "value:", polyc.optimal_value)
assert np.allclose(polyc.certificate.nu, [-1.0, -1.0, -1.0], atol=1e-7)
assert polyc.certificate.skip_residual <= 1e-7
assert len(polyc.generators) == 6, len(polyc.generators)
assert abs(polyc.optimal_value - 1.0) < 1e-7

# Example 2 directions (interpolation, bias, no skip)
ang = np.array([30, 45, 60, 75, 90]) * np.pi / 180.0
x2 = np.array([np.tan(np.pi / 3), -np.tan(5 * np.pi / 24), -np.tan(7 * np.pi / 24),
               -np.tan(9 * np.pi / 24), -np.tan(11 * np.pi / 24)])
X2 = x2[:, None]
Xb = np.column_stack([x2, np.ones(5)])
adirs = np.array([[np.cos(a), np.sin(a)] for a in ang])
y2 = 20.0 * (np.maximum(Xb @ adirs[0], 0) + np.maximum(Xb @ adirs[2], 0)
             + np.maximum(Xb @ adirs[4], 0))
ds2 = Dataset(X=X2, y=y2, beta=1.0, mode="interp", has_bias=True, has_skip=False)
b2 = enumerate_patterns(ds2)
poly2 = dp.build_polytope(ds2, b2)
print("example2 value:", poly2.optimal_value, "n gens:", len(poly2.generators))
dirs2 = np.array([g.direction for g in poly2.generators])
print(np.round(dirs2, 6))
want = [np.array([s3 / 2, 0.5]), np.array([np.sqrt(2) / 2, np.sqrt(2) / 2]),
        np.array([0.0, 1.0]), np.array([-s3 / 2, 0.5])]
for w in want:
    hit = min(float(np.linalg.norm(d - w)) for d in dirs2)
    assert hit < 1e-6, (w, dirs2)
print("example2 contains the four named directions")
assert abs(poly2.optimal_value - 60.0) < 1e-6

print("ALL POLYTOPE SMOKE CHECKS PASSED")
