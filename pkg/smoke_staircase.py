import numpy as np
import sys
sys.path.insert(0, "tests")
from reluset.arrangement import Dataset, enumerate_patterns
from reluset import dual_polytope as dp
from reluset import staircase as st
from reluset import convex_core as cc
from oracles import oracle_accepted_cardinalities

s3 = np.sqrt(3.0)

def widths_of(ds, name, expect=None):
    basis = enumerate_patterns(ds)
    poly = dp.build_polytope(ds, basis)
    rep = st.critical_widths(poly)
    Q = cc.skip_basis(ds) if ds.has_skip else None
    acc = oracle_accepted_cardinalities(poly.generator_matrix, poly.y_star,
                                        skip_basis=Q)
    print(f"{name}: (m*,M*)=({rep.m_star},{rep.M_star}) accepted={rep.accepted} "
          f"oracle={acc} gens={rep.generator_count} tested={rep.subsets_tested}")
    assert list(rep.accepted) == acc, (rep.accepted, acc)
    if expect is not None:
        assert (rep.m_star, rep.M_star) == expect, (rep.m_star, rep.M_star, expect)
    return poly, rep

# Example 1
X1 = np.array([[-s3, 1.0], [s3, 1.0]])
ds1 = Dataset(X=X1, y=np.array([1.0, 1.0]), beta=0.1, mode="reg",
              has_bias=False, has_skip=False)
poly1, rep1 = widths_of(ds1, "example1", expect=(1, 2))
assert rep1.full_connection_width == 3
assert st.FULLY_CONNECTED in rep1.widths[3]
assert st.FULLY_CONNECTED not in rep1.widths[2]
assert rep1.widths[1] >= {st.FINITE_SET}
assert st.CONTINUUM_EXISTS in rep1.widths[2]
assert st.ISOLATED_POINT_EXISTS in rep1.widths[2]
assert st.PERMUTATIONS_CONNECTED in rep1.widths[3]

# irreducibility + pruning on example1 (generator order: (0,1), (1,0), (1,1))
assert st.is_irreducible(poly1, [0.0, 0.0, 0.95])
assert st.is_irreducible(poly1, [0.475, 0.475, 0.0])
assert not st.is_irreducible(poly1, [0.275, 0.275, 0.4])
c_out, path = st.prune_to_irreducible(poly1, [0.275, 0.275, 0.4])
print("pruned:", c_out, "steps:", max(len(path) - 1, 0))
assert st.is_irreducible(poly1, c_out)
assert np.sum(c_out > 1e-9) <= 2
assert len(path) == 2  # one pruning step
for cvec in path:
    assert np.all(cvec >= 0)
    fit = poly1.generator_matrix @ cvec
    assert np.allclose(fit, poly1.y_star, atol=1e-9), (cvec, fit)
    assert abs(np.sum(cvec) - 0.95) < 1e-9  # objective-constant surrogate
c_same, path0 = st.prune_to_irreducible(poly1, [0.0, 0.0, 0.95])
assert len(path0) == 0 and np.allclose(c_same, [0.0, 0.0, 0.95])

# Example 2
ang = np.array([30, 45, 60, 75, 90]) * np.pi / 180.0
x2 = np.array([np.tan(np.pi / 3), -np.tan(5 * np.pi / 24), -np.tan(7 * np.pi / 24),
               -np.tan(9 * np.pi / 24), -np.tan(11 * np.pi / 24)])
Xb = np.column_stack([x2, np.ones(5)])
adirs = np.array([[np.cos(a), np.sin(a)] for a in ang])
y2 = 20.0 * (np.maximum(Xb @ adirs[0], 0) + np.maximum(Xb @ adirs[2], 0)
             + np.maximum(Xb @ adirs[4], 0))
ds2 = Dataset(X=x2[:, None], y=y2, beta=1.0, mode="interp", has_bias=True, has_skip=False)
poly2, rep2 = widths_of(ds2, "example2", expect=(3, 5))

# interior family member of example2: support-6 point, prune to <= 5
from reluset.arrangement import nnls_linear
G2 = poly2.generator_matrix
c0 = nnls_linear(G2, poly2.y_star)
assert np.abs(G2 @ c0 - poly2.y_star).max() < 1e-8
_, _, Vt = np.linalg.svd(G2)
dnull = Vt[-1]
assert np.abs(G2 @ dnull).max() < 1e-9
cint = None
for s in np.linspace(-3.0, 3.0, 1201):
    cand = c0 + s * dnull
    if np.all(cand > 1e-6):
        cint = cand
        break
assert cint is not None, "no strictly positive interior member found"
assert not st.is_irreducible(poly2, cint)
c2out, path2 = st.prune_to_irreducible(poly2, cint)
print("example2 interior support:", int(np.sum(cint > 1e-9)),
      "-> pruned support:", int(np.sum(c2out > 1e-9)))
assert np.sum(c2out > 1e-9) <= 5
assert st.is_irreducible(poly2, c2out)
for cvec in path2:
    assert np.all(cvec >= -1e-12)
    assert np.allclose(G2 @ cvec, poly2.y_star, atol=1e-7)

# ce1 (skip): expected (1,1)
Xc = np.array([[1.0, 0.0], [-0.5, s3 / 2], [-0.5, -s3 / 2]])
yc = np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])
dsc = Dataset(X=Xc, y=yc, beta=1.0, mode="interp", has_bias=False, has_skip=True)
widths_of(dsc, "ce1", expect=(1, 1))

# ce2 (skip + bias): expected (1,1)
X4 = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
y4 = np.array([1.0, -1.0, 1.0, -1.0])
ds4 = Dataset(X=X4, y=y4, beta=1.0, mode="interp", has_bias=True, has_skip=True)
widths_of(ds4, "ce2", expect=(1, 1))

# appendixH: expected (2,2)
Xh = np.array([[-s3], [s3]])
yh = np.array([0.5, 1.5])
dsh = Dataset(X=Xh, y=yh, beta=1.0, mode="interp", has_bias=False, has_skip=False)
polyh, reph = widths_of(dsh, "appendixH", expect=(2, 2))
assert reph.full_connection_width == 3

# single-point dataset: (1,1)
dsp = Dataset(X=np.array([[1.0]]), y=np.array([1.0]), beta=1.0, mode="interp",
              has_bias=False, has_skip=False)
widths_of(dsp, "single-point", expect=(1, 1))

# zero-label: trivial report
ds0 = Dataset(X=X1, y=np.zeros(2), beta=0.5, mode="reg", has_bias=False, has_skip=False)
poly0 = dp.build_polytope(ds0, enumerate_patterns(ds0))
rep0 = st.critical_widths(poly0)
assert (rep0.m_star, rep0.M_star) == (0, 0)
print("zero-label widths OK")

print("ALL STAIRCASE SMOKE CHECKS PASSED")
