import math
import numpy as np

from reluset.arrangement import Dataset, enumerate_patterns, relu
from reluset.dual_polytope import build_polytope
from reluset import interpolators as itp
from reluset.transport import NetworkParams, network_fit, network_objective
from reluset.errors import (
    InvalidGeometry, PreconditionViolated, ShapeMismatch)

s3 = math.sqrt(3.0)

# --- linprog sanity (scipy HiGHS) ---------------------------------------
from scipy.optimize import linprog
res = linprog(np.array([-1.0, 0.0]), A_eq=np.array([[1.0, 1.0]]),
              b_eq=np.array([1.0]), bounds=(0.0, None), method="highs")
assert res.status == 0 and abs(res.x[0] - 1.0) < 1e-9, res
print("linprog OK")

# --- generate_nonunique_class -------------------------------------------
inst2 = itp.generate_nonunique_class(2, itp.ANGLES)
assert np.allclose(inst2.dataset.X.ravel(), [-s3, s3], atol=1e-12), inst2.dataset.X
assert np.allclose(inst2.directions[0], [s3 / 2, 0.5], atol=1e-12)
assert np.allclose(inst2.directions[1], [0.0, 1.0], atol=1e-12)
assert np.allclose(inst2.directions[2], [-s3 / 2, 0.5], atol=1e-12)
assert abs(inst2.optimal_value - 3.0) < 1e-12  # default weights: ones
print("n=2 class OK; x =", inst2.dataset.X.ravel())

w5 = np.array([20.0, 0.0, 20.0, 0.0, 20.0, 0.0])
inst5 = itp.generate_nonunique_class(5, itp.ANGLES, weights=w5)
x_paper = np.array([math.tan(math.pi / 3), -math.tan(5 * math.pi / 24),
                    -math.tan(7 * math.pi / 24), -math.tan(9 * math.pi / 24),
                    -math.tan(11 * math.pi / 24)])
assert np.allclose(sorted(inst5.dataset.X.ravel()), sorted(x_paper), atol=1e-12)
y_sorted = np.sort(np.floor(inst5.dataset.y + 1e-9))
assert np.array_equal(y_sorted, np.sort([94, 29, 24, 20, 20])), inst5.dataset.y
assert abs(inst5.optimal_value - 60.0) < 1e-12
assert abs(float(inst5.dual_vector @ inst5.dataset.y) - 60.0) < 1e-9
# dual prediction: every optimal direction's feature has unit dual pairing
Xb5 = np.column_stack([inst5.dataset.X.ravel(), np.ones(5)])
for k in range(6):
    val = float(inst5.dual_vector @ relu(Xb5 @ inst5.directions[k]))
    assert abs(val - 1.0) < 1e-9, (k, val)
print("n=5 class OK; y =", np.round(inst5.dataset.y, 3))

# premise violations
try:
    itp.generate_nonunique_class(2, [[-s3 / 2, 0.5], [0.5, s3 / 2]])
    raise AssertionError("expected InvalidGeometry for wrong v_n")
except InvalidGeometry as e:
    assert "v_n" in str(e), e
try:
    v = itp._equally_spaced_v(3)
    v[0] = v[0] * 1.5  # breaks s_3 = (0,1) but also s_2? no: v[0] is last summand
    itp.generate_nonunique_class(3, v)
    raise AssertionError("expected InvalidGeometry")
except InvalidGeometry as e:
    print("premise error (scaled v_1):", e)
# negative second component in a middle increment: angles 30, 20, 90
sa = np.array([[math.cos(math.pi / 6), math.sin(math.pi / 6)],
               [math.cos(math.pi / 9), math.sin(math.pi / 9)],
               [0.0, 1.0]])
vbad = np.array([sa[2] - sa[1], sa[1] - sa[0], sa[0]])
try:
    itp.generate_nonunique_class(3, vbad)
    raise AssertionError("expected InvalidGeometry for v_2")
except InvalidGeometry as e:
    assert "v_2" in str(e), e
    print("premise error (v_2 second component):", e)
try:
    itp.generate_nonunique_class(2, itp.ANGLES, weights=[1.0, -1.0, 1.0])
    raise AssertionError("expected PreconditionViolated")
except PreconditionViolated:
    pass
try:
    itp.generate_nonunique_class(2, itp.ANGLES, weights=[1.0, 1.0])
    raise AssertionError("expected ShapeMismatch")
except ShapeMismatch:
    pass

# --- builtins: datasets, reference models, objectives ---------------------
expected_obj = {"ce1": 1.0, "ce2": 4.0, "appendixH": 1.0,
                "example1": 0.0975, "example2": 60.0}
polytopes = {}
for name in itp.BUILTIN_NAMES:
    ex = itp.builtin_example(name)
    basis = enumerate_patterns(ex.dataset)
    poly = build_polytope(ex.dataset, basis)
    polytopes[name] = (ex, poly)
    assert abs(poly.optimal_value - expected_obj[name]) < 1e-7, (
        name, poly.optimal_value)
    assert abs(ex.expected_objective - expected_obj[name]) < 1e-12
    for i, model in enumerate(ex.reference_models):
        fit = network_fit(model, ex.dataset)
        obj = network_objective(model, ex.dataset)
        if ex.dataset.mode == "interp":
            assert np.max(np.abs(fit - ex.dataset.y)) < 1e-12, (name, i, fit)
        assert abs(obj - ex.expected_objective) < 1e-12, (name, i, obj)
    print(f"builtin {name}: objective {poly.optimal_value:.6f} "
          f"models={len(ex.reference_models)} arch={ex.architecture}")

# example1 regression reference fit
ex1, poly1 = polytopes["example1"]
assert np.allclose(network_fit(ex1.reference_models[0], ex1.dataset),
                   [0.95, 0.95], atol=1e-12)
assert np.allclose(network_fit(ex1.reference_models[1], ex1.dataset),
                   [0.95, 0.95], atol=1e-12)

# architecture tags
assert polytopes["ce1"][0].architecture == "SNB"
assert polytopes["ce2"][0].architecture == "SB"
assert polytopes["example2"][0].architecture == "NSB"

# --- eval_model ------------------------------------------------------------
m1 = ex1.reference_models[0]
vals = itp.eval_model(m1, np.array([-2.0, 0.3, 11.0]))
assert np.allclose(vals, 0.95, atol=1e-12), vals
ce2 = polytopes["ce2"][0]
second = ce2.reference_models[1]
assert abs(itp.eval_model(second, np.array([[0.5, 0.0]]))[0]) < 1e-12
first = ce2.reference_models[0]
probes2 = np.array([[0.5, 0.0], [0.0, 0.25], [-1.0, 2.0], [3.0, -1.0]])
want_a = 1.0 - 2.0 * np.abs(probes2[:, 1])
want_b = -1.0 + 2.0 * np.abs(probes2[:, 0])
assert np.allclose(itp.eval_model(first, probes2), want_a, atol=1e-12)
assert np.allclose(itp.eval_model(second, probes2), want_b, atol=1e-12)
zero = NetworkParams(np.zeros((2, 3)), np.zeros(2), skip=np.zeros(3))
assert np.allclose(itp.eval_model(zero, probes2), 0.0)
try:
    itp.eval_model(first, np.array([[1.0, 2.0, 3.0, 4.0]]))
    raise AssertionError("expected ShapeMismatch")
except ShapeMismatch:
    pass
try:
    itp.eval_model(first, probes2, dataset=ex1.dataset)
    raise AssertionError("expected ShapeMismatch (dataset cross-check)")
except ShapeMismatch:
    pass
print("eval_model OK")

# --- optimal_interpolator_family ------------------------------------------
ex1_fam = itp.optimal_interpolator_family(ex1.dataset, polytope=poly1)
assert ex1_fam.dimension == 1, ex1_fam.dimension
assert abs(ex1_fam.t_hi - 0.475) < 1e-9, ex1_fam.t_hi
A1 = ex1_fam.coefficients_at(0.0)
B1 = ex1_fam.coefficients_at(ex1_fam.t_hi)
assert np.allclose(A1, [0.0, 0.0, 0.95], atol=1e-9), A1
assert np.allclose(B1, [0.475, 0.475, 0.0], atol=1e-9), B1
assert np.allclose(ex1_fam.segments[0].rate, [1.0, 1.0, -2.0], atol=1e-9)
assert abs(ex1_fam.objective - 0.0975) < 1e-9
print("example1 family: t_hi", ex1_fam.t_hi, "endpoints", A1, B1)

ex2, poly2 = polytopes["example2"]
fam2 = itp.optimal_interpolator_family(ex2.dataset, polytope=poly2)
assert fam2.dimension == 1, fam2.dimension
print("example2 family: t_hi", fam2.t_hi)
assert abs(fam2.t_hi - 1.5194) < 2e-3, fam2.t_hi
# map generators to the six printed directions and check the printed rates
angles6 = np.array([30, 45, 60, 75, 90, 150]) * math.pi / 180.0
dirs6 = np.column_stack([np.cos(angles6), np.sin(angles6)])
paper_rate = {0: -7.076, 1: 13.1592, 2: -13.1623, 3: 13.159, 4: -7.081, 5: 1.0}
paper_at0 = {0: 20.0, 1: 0.0, 2: 20.0, 3: 0.0, 4: 20.0, 5: 0.0}
gen_of = {}
for k, rec in enumerate(poly2.generators):
    dots = dirs6 @ rec.direction
    j = int(np.argmax(dots))
    assert dots[j] > 1 - 1e-9, (k, dots)
    gen_of[j] = k
assert len(gen_of) == 6
A2 = fam2.coefficients_at(0.0)
rate2 = fam2.segments[0].rate
for j in range(6):
    k = gen_of[j]
    assert abs(A2[k] - paper_at0[j]) < 1e-6, (j, A2[k])
    rel = abs(rate2[k] - paper_rate[j]) / abs(paper_rate[j])
    assert rel < 5e-4, (j, rate2[k], paper_rate[j])
print("example2 rates match printed values to 3 significant digits:",
      np.round(rate2, 4))
# distinctness on the probe grid
grid2 = itp.default_probe_grid(ex2.dataset)
f_lo = itp.eval_model((fam2, 0.0), grid2)
f_hi = itp.eval_model((fam2, fam2.t_hi), grid2)
assert np.max(np.abs(f_lo - f_hi)) > 1e-3, np.max(np.abs(f_lo - f_hi))
print("example2 members differ by", np.max(np.abs(f_lo - f_hi)))

exh, polyh = polytopes["appendixH"]
famh = itp.optimal_interpolator_family(exh.dataset, polytope=polyh)
assert famh.dimension == 1
AH = famh.coefficients_at(0.0)
BH = famh.coefficients_at(famh.t_hi)
assert abs(famh.t_hi - 0.25) < 1e-9, famh.t_hi
assert np.allclose(AH, [0.5, 0.0, 0.5], atol=1e-9), AH
assert np.allclose(BH, [0.75, 0.25, 0.0], atol=1e-9), BH
print("appendixH family OK:", AH, BH)

for name in ("ce1", "ce2"):
    ex, poly = polytopes[name]
    fam = itp.optimal_interpolator_family(ex.dataset, polytope=poly)
    print(f"{name} family: dim={fam.dimension} gens={len(poly.generators)} "
          f"vertices={len(fam.vertices)}")
    assert fam.dimension >= 1
    assert len(fam.vertices) >= 2
    assert abs(fam.objective - expected_obj[name]) < 1e-7
    # every vertex interpolates and costs the optimum
    Xe = ex.dataset.effective_design
    G = poly.generator_matrix
    for c in fam.vertices:
        resid = poly.y_star - G @ c
        a0, *_ = np.linalg.lstsq(Xe, resid, rcond=None)
        assert np.max(np.abs(G @ c + Xe @ a0 - ex.dataset.y)) < 1e-8
        assert abs(np.sum(c) - expected_obj[name]) < 1e-7, (c, np.sum(c))

# interpolation residual across 20 sampled members, all builtins
for name in itp.BUILTIN_NAMES:
    ex, poly = polytopes[name]
    fam = itp.optimal_interpolator_family(ex.dataset, polytope=poly)
    seg = fam.segments[0]
    worst = 0.0
    for t in np.linspace(seg.t_lo, seg.t_hi, 20):
        member = fam.member_at(float(t))
        fit = network_fit(member, ex.dataset)
        if ex.dataset.mode == "interp":
            worst = max(worst, float(np.max(np.abs(fit - ex.dataset.y))))
        assert abs(network_objective(member, ex.dataset) - fam.objective) < 1e-8
    assert worst < 1e-8, (name, worst)
    print(f"{name}: 20 members exact (worst residual {worst:.2e})")

print("ALL INTERPOLATOR SMOKE CHECKS PASSED")
