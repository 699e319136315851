import time
import numpy as np

from chernweil.meshes import build_standard_manifold
from chernweil.bundles import (flat_bundle, fubini_study_bundle,
                               oriented_round_sphere_bundle,
                               equivariance_residual, cocycle_residual,
                               metric_compatibility_residual)
from chernweil.currents import local_degree, divisor_from_section
from chernweil.invariants import eval_chern
from chernweil.bundles import curvature
from chernweil.spinor import (build_spinor_pair, reverse_orientation,
                              clifford_map, polar_vector_field,
                              constant_vector_field, grr_check)
from chernweil.errors import SpinStructureError

t0 = time.time()
sph = build_standard_manifold("sphere2_stereographic", resolution=96)
V = oriented_round_sphere_bundle(sph)
P = build_spinor_pair(V, -1)

print(f"curvature identity residual: {P.curvature_identity_residual():.3e}")
cp = eval_chern(curvature(P.s_plus), 1).integrate()
cm = eval_chern(curvature(P.s_minus), 1).integrate()
print(f"int c1(S+) = {np.real(cp):+.6f}  int c1(S-) = {np.real(cm):+.6f}  "
      f"difference {np.real(cm-cp):+.6f} (want +2)")
print(f"S+ cocycle residual: {cocycle_residual(P.s_plus):.2e}")
print(f"S+ metric compat:    {metric_compatibility_residual(P.s_plus):.2e}")

# spin obstruction: odd line degree must refuse
V3 = fubini_study_bundle(sph, 3)
try:
    from chernweil.spinor import _scalar_line_model, _half_power_bundle
    _half_power_bundle(_scalar_line_model(oriented_round_sphere_bundle(sph)), -1, 3)
    print("odd degree: NO ERROR (bad)")
except SpinStructureError as e:
    print(f"odd degree refused: {e}")
try:
    build_spinor_pair(V, 1)
    print("wrong half choice: NO ERROR (bad)")
except SpinStructureError as e:
    print(f"wrong half refused: {e}")

# orientation reversal swaps
Q = reverse_orientation(P)
qp = eval_chern(curvature(Q.s_plus), 1).integrate()
print(f"reversed: int c1(S+) = {np.real(qp):+.4f} (want +1), "
      f"identity res {Q.curvature_identity_residual():.2e}")

# clifford map of the polar field
alpha = polar_vector_field(V)
cl = clifford_map(P, alpha)
print(f"clifford equivariance: {equivariance_residual(cl):.2e}")
for s in cl.singularities:
    print(f"  local degree at {s.chart}: "
          f"{local_degree(cl, s):+.3f} vs field index "
          f"{local_degree(alpha, s):+.3f}")
div = divisor_from_section(cl)
print(f"divisor total mass: {div.total_mass():.6f} (want 2)")

rep = grr_check(P, alpha)
print(f"grr untwisted: residual {rep.residual:.3e}, "
      f"c1 diff total {rep.c1_difference_total:+.5f} (want -2), "
      f"div mass {rep.div_mass:.3f}, kappa {rep.kappa:+.0f}")
for fid, (lhs, dv, dT, r) in rep.rows.items():
    print(f"   {fid:12s} lhs {lhs:+.5f} div {dv:+.5f} dT {dT:+.5f} resid {r:.2e}")

# flat rank-1 twist: identical residuals
tw = flat_bundle(sph, 1, "complex", name="twistE")
rep2 = grr_check(P, alpha, twist=tw)
drift = max(abs(rep.rows[k][3] - rep2.rows[k][3]) for k in rep.rows)
print(f"flat twist drift: {drift:.3e} (want 0)")

# flat torus, nowhere-zero section
tor = build_standard_manifold("torus2", resolution=24)
Vf = flat_bundle(tor, 2, "real", name="plane", oriented=True)
Pf = build_spinor_pair(Vf, 0)
af = constant_vector_field(Vf)
repf = grr_check(Pf, af)
print(f"flat torus residual: {repf.residual:.3e} (want <= 1e-3), "
      f"div mass {repf.div_mass:.1e}")

# refinement trend of the sphere residual
for res in (64, 128):
    sphr = build_standard_manifold("sphere2_stereographic", resolution=res)
    Vr = oriented_round_sphere_bundle(sphr)
    Pr = build_spinor_pair(Vr, -1)
    r = grr_check(Pr, polar_vector_field(Vr)).residual
    print(f"res {res:3d}: grr residual {r:.3e}")

print(f"total {time.time()-t0:.1f}s")
