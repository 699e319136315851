import time
import numpy as np

from chernweil.meshes import build_standard_manifold
from chernweil.bundles import flat_bundle, oriented_round_sphere_bundle, get_mode
from chernweil.invariants import eval_pfaffian
from chernweil.bundles import curvature
from chernweil.thom import (build_total_space, thom_form_explicit,
                            thom_form_from_mode, fiber_integrate,
                            fiber_mass_radial, zero_section_restriction,
                            zero_section_current, pullback_to_total,
                            tail_estimate, thom_limits, cohomology_pairing,
                            tautological_covariant_derivative)
from chernweil.currents import pair_current
from chernweil.fields import FieldForm
from chernweil.battery import test_battery

t0 = time.time()

base = build_standard_manifold("torus2", resolution=16)
E2 = flat_bundle(base, 2, "real", name="plane", oriented=True)
TS = build_total_space(base, E2, radius=8.0, fiber_resolution=24,
                       modes=(get_mode("sqrt"), get_mode("compact")))

pts = np.array([[0.3, 1.2, 0.7, -0.4],
                [2.0, 4.0, 2.5, 1.5],
                [1.0, 0.5, 0.01, -0.02],
                [5.0, 2.0, 0.0, 0.0]])

# Du = du exactly on the flat bundle
Du = tautological_covariant_derivative(TS)
v = Du.at("t", pts)
err = max(np.max(np.abs(v[4] - np.array([[1.0], [0.0]]))),
          np.max(np.abs(v[8] - np.array([[0.0], [1.0]]))))
print(f"[flat] Du = du: {err:.3e}, extra masks: {sorted(set(v) - {4, 8})}")

s = 0.8
tau_e = thom_form_explicit(TS, s)
tau_m = thom_form_from_mode(TS, get_mode("sqrt"), s)
ve = tau_e.at("t", pts)
vm = tau_m.at("t", pts)
worst = max(np.max(np.abs(ve.get(m, 0) - vm.get(m, np.zeros(len(pts)))))
            for m in set(ve) | set(vm))
print(f"[flat] explicit vs sqrt-mode route: {worst:.3e}")

# radial fiber mass
for sv in (0.1, 1.0, 10.0):
    tau = thom_form_explicit(TS, sv)
    mass = fiber_mass_radial(TS, tau, sv, "t", np.array([[0.3, 1.2], [4.0, 2.0]]))
    print(f"[flat] radial mass s={sv:<4}: max dev {np.max(np.abs(mass-1)):.2e}")

# Gaussian bump fiber integration vs separable 1D oracle (signed)
def gauss_ev(p):
    p = np.atleast_2d(p)
    return {12: np.exp(-(p[:, 2] ** 2 + p[:, 3] ** 2))}
g = FieldForm(TS.manifold, 2, {"t": gauss_ev})
gi = fiber_integrate(TS, g)
got = gi.at("t", np.array([[0.3, 1.2]]))[0][0]
c = TS.manifold.chart("t")
nodes = c.axis_nodes(2)
w1 = np.full(len(nodes), c.spacing(2)); w1[0] *= 0.5; w1[-1] *= 0.5
oracle_1d = np.sum(w1 * np.exp(-nodes ** 2))
print(f"[flat] gaussian fiber integral: {got:.8f} vs signed oracle "
      f"{-oracle_1d**2:.8f} diff {abs(got - (-oracle_1d**2)):.2e}")

# pullback of a base form has no fiber-volume components
psi0 = test_battery(base, 2, seed=3)[0]
pz = fiber_integrate(TS, pullback_to_total(TS, psi0.form))
print(f"[flat] fiberIntegrate(pi* base form): "
      f"{max((np.max(np.abs(x)) for x in pz.at('t', np.array([[0.3,1.2]])).values()), default=0.0):.3e}")

# thom_limits, sqrt mode in the tail-dominated regime
rep = thom_limits(TS, get_mode("sqrt"), [4.0, 2.0, 1.0], seed=1)
print(f"[flat] sqrt limits monotone={rep.monotone} shellmax(s=1)={rep.shell_max[-1]:.2e}")
for i, fid in enumerate(rep.form_ids):
    if rep.base_integrals[i] != 0 or rep.pairing_errors[i][-1] > 1e-10:
        print(f"   {fid:12s} errs " + " ".join(f"{e:.2e}" for e in rep.pairing_errors[i])
              + f"  order {rep.orders[i]:.2f}")

# cohomology s-independence, compact mode (box-exact support)
vals = cohomology_pairing(TS, get_mode("compact"), [4.0, 2.83, 2.0])
print(f"[flat] cohomology pairings: {[f'{v.real:.6f}' for v in vals]} "
      f"spread {max(abs(a-b) for a in vals for b in vals):.2e}")

print(f"-- flat block {time.time()-t0:.1f}s --")

# ---- sphere ----
t1 = time.time()
sph = build_standard_manifold("sphere2_stereographic", resolution=24)
TB = oriented_round_sphere_bundle(sph)
TSs = build_total_space(sph, TB, radius=8.0, fiber_resolution=24)

# Du - du = omega.u, chart-compatible: g Du_src = pullback of Du_dst
Du = tautological_covariant_derivative(TSs)
tr = [t for t in TSs.manifold.transitions if t.src == "north"][0]
spts = np.array([[1.1, 0.8, 0.5, -0.2], [0.9, -1.3, 1.0, 0.4]])
src = Du.at("north", spts)
g = TB.cocycle("north", "south")(spts[:, :2])
from chernweil.forms import pullback_components
pulled = pullback_components(Du.evals["south"], tr.apply, tr.jacobian_at,
                             spts, 1, 4)
worst = 0.0
for m in set(pulled) | set(src):
    a = pulled.get(m, np.zeros((len(spts), 2, 1)))
    b = (g @ np.asarray(src.get(m, np.zeros((len(spts), 2, 1)))))
    worst = max(worst, np.max(np.abs(a - b)))
print(f"[sphere] Du chart compatibility: {worst:.3e}")

s = 0.6
te = thom_form_explicit(TSs, s)
tm = thom_form_from_mode(TSs, get_mode("sqrt"), s)
worst = 0.0
for ch in ("north", "south"):
    a = te.at(ch, spts)
    b = tm.at(ch, spts)
    worst = max(np.max(np.abs(a.get(m, 0) - b.get(m, np.zeros(len(spts)))))
                for m in set(a) | set(b))
print(f"[sphere] explicit vs sqrt-mode: {worst:.3e}")

pf = eval_pfaffian(curvature(TB))
rest = zero_section_restriction(TSs, thom_form_explicit(TSs, 0.3))
bp = np.array([[0.3, -0.2], [1.1, 0.8], [0.0, 0.0], [-0.7, 0.4]])
print(f"[sphere] restriction vs Pf: "
      f"{np.max(np.abs(rest.at('north', bp)[3] - pf.at('north', bp)[3])):.3e}")

mass = fiber_mass_radial(TSs, te, s, "north", bp)
print(f"[sphere] radial mass s=0.6 max dev: {np.max(np.abs(mass-1)):.2e}")

# compact-mode limits on the sphere; error at finest grid
rep = thom_limits(TSs, get_mode("compact"), [4.0, 2.0, 1.0], seed=2)
rel = [rep.pairing_errors[i][-1] / max(1.0, abs(rep.base_integrals[i]))
       for i in range(len(rep.form_ids))]
print(f"[sphere] compact limits: worst rel err at finest {max(rel):.2e} "
      f"monotone={rep.monotone}")
for i, fid in enumerate(rep.form_ids):
    print(f"   {fid:12s} errs " + " ".join(f"{e:.2e}" for e in rep.pairing_errors[i]))

vals = cohomology_pairing(TSs, get_mode("compact"), [4.0, 2.83, 2.0])
print(f"[sphere] cohomology pairings: {[f'{v.real:.6f}' for v in vals]} "
      f"spread {max(abs(a-b) for a in vals for b in vals):.2e}")

print(f"-- sphere block {time.time()-t1:.1f}s --")

# ---- 24^4 full-grid mode-route timing ----
t2 = time.time()
tau = thom_form_from_mode(TSs, get_mode("compact"), 1.0)
for c in TSs.manifold.charts:
    vals = tau.at(c.name, c.chart_points if hasattr(c, "chart_points") else c.points())
print(f"[perf] mode-route tau on full 24^4 grid (both charts): {time.time()-t2:.1f}s")
print(f"total {time.time()-t0:.1f}s")
