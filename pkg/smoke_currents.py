import numpy as np
import time
from chernweil.meshes import build_standard_manifold
from chernweil.bundles import (fubini_study_bundle, flat_bundle, section_map,
                               DeclaredSingularity, MODES, curvature)
from chernweil.battery import test_battery, away_battery
from chernweil.currents import (smooth_form_current, l1loc_current,
                                weighted_points_current, pair_current,
                                current_boundary, divisor_from_section,
                                spherical_potential, transgression_family,
                                characteristic_current_limit, section_sigma,
                                local_degree)
from chernweil.fields import FieldForm, constant_field, scalar_field
from chernweil.invariants import eval_chern

T2 = build_standard_manifold("torus2", resolution=48)
S = build_standard_manifold("cp1", resolution=64)

# 1) trivial pairings
area = FieldForm(T2, 2, {"t": lambda pts: {3: np.ones(len(pts))}})
one = constant_field(T2, 1.0)
print("area vs 1:", pair_current(smooth_form_current(area), one))

W = weighted_points_current(T2, [("t", (0.25, 0.25), 1.0), ("t", (0.75, 0.5), -1.0)])
psi = scalar_field(T2, {"t": lambda pts: np.sin(2*np.pi*pts[:,0])*np.cos(2*np.pi*pts[:,1])})
expect = np.sin(np.pi/2)*np.cos(np.pi/2) - np.sin(1.5*np.pi)*np.cos(np.pi)
got = pair_current(W, psi)
print("weighted points:", got, "expect", expect, "err", abs(got-expect))

# linearity
psi2 = scalar_field(T2, {"t": lambda pts: np.cos(2*np.pi*pts[:,1])})
lin = pair_current(W, psi*1.7 + psi2*(-0.3)) - (1.7*pair_current(W, psi) - 0.3*pair_current(W, psi2))
print("linearity:", abs(lin))

# 2) boundary of smooth current matches d under pairing; dd -> 0
u = scalar_field(T2, {"t": lambda pts: np.sin(2*np.pi*pts[:,0]+1.0)*np.cos(2*np.pi*pts[:,1])})
u1 = u.d()  # 1-form
psi0 = scalar_field(T2, {"t": lambda pts: np.cos(2*np.pi*(pts[:,0]+2*pts[:,1]))})
b1 = pair_current(current_boundary(smooth_form_current(u1)), psi0)
b2 = pair_current(smooth_form_current(u1.d()), psi0)
print("boundary vs d:", abs(b1-b2))
bb = pair_current(current_boundary(current_boundary(smooth_form_current(u))),
                  psi0)
print("dd pairing:", abs(bb))

# 3) divisor of O(1) section a(z)=z and conj section
F1 = fubini_study_bundle(S, 1)
sing0 = [DeclaredSingularity("north", (0.0, 0.0), 0.2)]
a_z = section_map(F1, {"north": lambda pts: pts[:,0]+1j*pts[:,1],
                       "south": lambda pts: np.ones(len(pts), dtype=complex)},
                  sing0)
div = divisor_from_section(a_z)
print("Div(z):", div.points, "mass", div.total_mass())

a_zbar = section_map(flat_bundle(S, 1), {"north": lambda pts: pts[:,0]-1j*pts[:,1],
                                         "south": lambda pts: np.ones(len(pts), dtype=complex)},
                     sing0)
# note: not equivariant, but divisor only reads the local scalar; fine for the winding check
print("winding of zbar:", local_degree(a_zbar, sing0[0].as_singular_point()
      if hasattr(sing0[0], "as_singular_point") else sing0[0]))

# nowhere-zero section -> zero current
a_nz = section_map(flat_bundle(T2, 1),
                   {"t": lambda pts: np.exp(2j*np.pi*pts[:,0])}, [])
print("nowhere zero divisor:", divisor_from_section(a_nz).points)

# 4) spherical potential: O(2) with zeros at 0 and infinity: a_N = z, a_S = w
F2 = fubini_study_bundle(S, 2)
sing2 = [DeclaredSingularity("north", (0.0, 0.0), 0.2),
         DeclaredSingularity("south", (0.0, 0.0), 0.2)]
a2 = section_map(F2, {"north": lambda pts: pts[:,0]+1j*pts[:,1],
                      "south": lambda pts: pts[:,0]+1j*pts[:,1]}, sing2)
from chernweil.bundles import equivariance_residual
print("a2 equivariance:", equivariance_residual(a2))
t0 = time.time()
res = spherical_potential(a2, "c1")
print(f"spherical potential O(2) residual: {res.residual:.3e} ({time.time()-t0:.1f}s)")
print("  details:", {k: f"{v:.2e}" for k, v in res.details.items()})

# flat nowhere-zero: residual tiny
res_flat = spherical_potential(a_nz, "c1")
print("flat nowhere-zero residual:", f"{res_flat.residual:.3e}")

# 5) transgression family
B_from = fubini_study_bundle(S, 3)
B_to = fubini_study_bundle(S, 3, perturbation=0.4)
tr = transgression_family("u", B_from, B_to)
print("transgression u residual:", f"{tr.residual:.3e}")
tr0 = transgression_family("u", B_from, B_from)
vals = tr0.T.at("north", np.array([[0.3, 0.4]]))
print("T(D,D) values:", {m: abs(v).max() for m, v in vals.items()})
tr2 = transgression_family("u^2", B_from, B_to)
print("transgression u^2 residual (degree-4 forms vanish on 2D):", f"{tr2.residual:.3e}")

# 6) characteristic current limit, O(1), phi=u
t0 = time.time()
cur, rep = characteristic_current_limit("u", a_z, MODES["algebraic"],
                                        [0.3, 0.1, 0.03, 0.01], seed=3)
print(f"char limit ({time.time()-t0:.1f}s): divergent={rep.divergent} support_ok={rep.support_ok}")
for row in rep.rows:
    print(f"  {row.form_id:12s} away={row.away_from_sigma} "
          f"extrap={row.extrapolated:+.5f} zero={row.zero_route:+.5f} "
          f"deltas={[f'{d:.2e}' for d in row.cauchy_deltas]}")

# S_phi extrapolated vs psi(0) for each test form
sigma_pt = np.array([[0.0, 0.0]])
print("S_phi vs psi(0):")
for row in rep.rows:
    if row.away_from_sigma:
        continue
    tfs = test_battery(S, 0, seed=3, sigma=a_z.singular_points())
    tf = [t for t in tfs if t.form_id == row.form_id][0]
    want = tf.form.at("north", sigma_pt)[0][0]
    S_phi = row.extrapolated - row.zero_route
    print(f"  {row.form_id:12s} S_phi={S_phi:+.5f} psi(0)={want:+.5f} "
          f"err={abs(S_phi-want):.2e}")
