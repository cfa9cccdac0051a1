import numpy as np
import sys
sys.path.insert(0, "tests")
from reluset.arrangement import Dataset, enumerate_patterns
from reluset import convex_core as cc
from oracles import oracle_solve

def run(name, ds, expect=None):
    basis = enumerate_patterns(ds)
    rep = cc.solve(ds, basis)
    masks = [p.mask for p in basis]
    oval, ofit = oracle_solve(ds.effective_design, ds.y, masks, ds.beta, ds.mode, ds.has_skip)
    line = (f"{name}: obj={rep.solution.objective:.10f} oracle={oval:.10f} "
            f"gap={rep.gap:.2e} iters={rep.iterations}")
    if expect is not None:
        line += f" expect={expect}"
    print(line)
    assert abs(rep.solution.objective - oval) < 5e-6, (rep.solution.objective, oval)
    assert rep.gap >= -1e-8, ("weak duality violated", rep.gap)
    if ds.mode == "reg":
        tol_fit = 2.0 * np.sqrt(2.0 * max(rep.gap, 1e-9)) + 1e-4
        assert np.allclose(rep.solution.fit, ofit, atol=tol_fit), (rep.solution.fit, ofit)
    return rep

# Example 1: regression beta=0.1
X1 = np.array([[-np.sqrt(3.0), 1.0], [np.sqrt(3.0), 1.0]])
y1 = np.array([1.0, 1.0])
ds1 = Dataset(X=X1, y=y1, beta=0.1, mode="reg", has_bias=False, has_skip=False)
rep1 = run("example1", ds1, expect=0.0975)
print("   fit:", rep1.solution.fit, "dual:", rep1.dual_candidate)
assert abs(rep1.solution.objective - 0.0975) < 1e-9
assert np.allclose(rep1.solution.fit, [0.95, 0.95], atol=1e-9)
assert np.allclose(rep1.dual_candidate, [-0.05, -0.05], atol=1e-9)

# Example 2: interpolation with bias, no skip
ang = np.array([30, 45, 60, 75, 90]) * np.pi / 180.0
x2 = np.array([np.tan(np.pi / 3), -np.tan(5 * np.pi / 24), -np.tan(7 * np.pi / 24),
               -np.tan(9 * np.pi / 24), -np.tan(11 * np.pi / 24)])
X2 = x2[:, None]
Xb = np.column_stack([x2, np.ones(5)])
dirs = np.array([[np.cos(a), np.sin(a)] for a in ang])
y2 = 20.0 * (np.maximum(Xb @ dirs[0], 0) + np.maximum(Xb @ dirs[2], 0) + np.maximum(Xb @ dirs[4], 0))
print("y2:", y2)
ds2 = Dataset(X=X2, y=y2, beta=1.0, mode="interp", has_bias=True, has_skip=False)
rep2 = run("example2", ds2, expect=60.0)
assert abs(rep2.solution.objective - 60.0) < 1e-6

# ce1: interpolation, skip, no bias
X3 = np.array([[1.0, 0.0], [-0.5, np.sqrt(3) / 2], [-0.5, -np.sqrt(3) / 2]])
y3 = np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])
ds3 = Dataset(X=X3, y=y3, beta=1.0, mode="interp", has_bias=False, has_skip=True)
rep3 = run("ce1", ds3, expect=1.0)
assert abs(rep3.solution.objective - 1.0) < 1e-8
print("   ce1 dual:", rep3.dual_candidate, "(paper sign flipped -> expect (-1,-1,-1))")

# ce2: interpolation, skip AND bias
X4 = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
y4 = np.array([1.0, -1.0, 1.0, -1.0])
ds4 = Dataset(X=X4, y=y4, beta=1.0, mode="interp", has_bias=True, has_skip=True)
rep4 = run("ce2", ds4, expect=4.0)
assert abs(rep4.solution.objective - 4.0) < 1e-8
print("   ce2 dual:", rep4.dual_candidate, "(expect -(1,-1,1,-1))")

# appendixH: interpolation, bias, no skip, 1-d
X5 = np.array([[-np.sqrt(3.0)], [np.sqrt(3.0)]])
y5 = np.array([0.5, 1.5])
ds5 = Dataset(X=X5, y=y5, beta=1.0, mode="interp", has_bias=True, has_skip=False)
rep5 = run("appendixH", ds5)

# zero labels
ds0 = Dataset(X=X1, y=np.zeros(2), beta=0.5, mode="reg", has_bias=False, has_skip=False)
rep0 = cc.solve(ds0, enumerate_patterns(ds0))
print("zero-y: obj=", rep0.solution.objective, "gap=", rep0.gap, "iters=", rep0.iterations)
assert rep0.solution.objective == 0.0

# random regression instances vs oracle
rng = np.random.default_rng(7)
for k in range(12):
    n = int(rng.integers(2, 7))
    d = int(rng.integers(1, 4))
    X = rng.normal(size=(n, d))
    y = rng.normal(size=n)
    beta = float(rng.uniform(0.05, 1.0))
    bias = bool(rng.integers(0, 2))
    skip = bool(rng.integers(0, 2))
    ds = Dataset(X=X, y=y, beta=beta, mode="reg", has_bias=bias, has_skip=skip)
    run(f"rand-reg-{k}(n={n},d={d},b={bias},s={skip})", ds)

# random interpolation instances vs oracle (keep n <= d_eff+1 for feasibility richness)
for k in range(8):
    n = int(rng.integers(2, 5))
    d = int(rng.integers(2, 4))
    X = rng.normal(size=(n, d))
    y = rng.normal(size=n)
    bias = bool(rng.integers(0, 2))
    skip = bool(rng.integers(0, 2))
    ds = Dataset(X=X, y=y, beta=1.0, mode="interp", has_bias=bias, has_skip=skip)
    run(f"rand-interp-{k}(n={n},d={d},b={bias},s={skip})", ds)

# infeasible interpolation: duplicated row, inconsistent labels
from reluset.errors import Infeasible
Xdup = np.array([[1.0], [1.0]])
ydup = np.array([1.0, 2.0])
dsdup = Dataset(X=Xdup, y=ydup, beta=1.0, mode="interp", has_bias=False, has_skip=False)
try:
    cc.solve(dsdup, enumerate_patterns(dsdup))
    print("FAIL: expected Infeasible")
except Infeasible as e:
    print("infeasible correctly raised:", e)

print("ALL CORE SMOKE CHECKS PASSED")
