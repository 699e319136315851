import numpy as np
from chernweil.meshes import build_standard_manifold
from chernweil.bundles import (fubini_study_bundle, oriented_round_sphere_bundle,
                               flat_bundle, curvature, cocycle_residual,
                               equivariance_residual,
                               connection_compatibility_residual,
                               metric_compatibility_residual, section_map,
                               least_squares_inverse, smoothed_beta, MODES,
                               validate_mode, pushforward_connection,
                               pullback_connection, adjoint_map,
                               DeclaredSingularity, atomicity_diagnostic)
from chernweil.invariants import eval_chern, eval_pfaffian

S = build_standard_manifold("cp1", resolution=96)

# 1) Chern numbers from exact curvature
for k in (-2, 1, 3):
    B = fubini_study_bundle(S, k)
    c1 = eval_chern(curvature(B), 1)
    val = c1.integrate()
    print(f"O({k}): int c1 = {val:.8f}  err {abs(val - k):.2e}")

# 1b) same from FD curvature (drop exact)
B = fubini_study_bundle(S, 3)
B_fd = B.with_connection(B.connection)      # clears curvature_exact
val = eval_chern(curvature(B_fd), 1).integrate()
print(f"O(3) FD curvature: int c1 = {val:.8f} err {abs(val-3):.2e}")

# 1c) perturbed metric: same Chern number, different pointwise form
Bp = fubini_study_bundle(S, 3, perturbation=0.35)
valp = eval_chern(curvature(Bp), 1).integrate()
f0 = eval_chern(curvature(B), 1)
fp = eval_chern(curvature(Bp), 1)
diff = (fp - f0).sup_on_nodes()
print(f"O(3) perturbed: int c1 = {valp:.8f} err {abs(valp-3):.2e}  pointwise diff {diff:.3f}")
# FD-vs-exact curvature cross-check on the perturbed bundle
Bp_fd = Bp.with_connection(Bp.connection)
cross = (eval_chern(curvature(Bp_fd), 1) - fp).sup_on_nodes()
print(f"perturbed FD-vs-exact curvature sup: {cross:.2e}")

# 2) structural residuals
print("cocycle residual:", cocycle_residual(B))
print("connection compat residual O(3):", connection_compatibility_residual(B))
print("metric compat residual O(3):", metric_compatibility_residual(B))
print("metric compat residual perturbed:", metric_compatibility_residual(Bp))

# 3) Gauss-Bonnet
E2 = oriented_round_sphere_bundle(S)
pf = eval_pfaffian(curvature(E2))
print("int Pf(TS2):", pf.integrate(), " (expect 2)")
print("TS2 cocycle residual:", cocycle_residual(E2))
print("TS2 connection compat:", connection_compatibility_residual(E2))

# 4) sections + equivariance: O(3) section with zeros at 0.7, -0.3+0.4i, 1.1i
zeros = [0.7 + 0.0j, -0.3 + 0.4j, 1.1j]
def north(pts):
    z = pts[:, 0] + 1j * pts[:, 1]
    return (z - zeros[0]) * (z - zeros[1]) * (z - zeros[2])
def south(pts):
    w = pts[:, 0] + 1j * pts[:, 1]
    return (1 - zeros[0] * w) * (1 - zeros[1] * w) * (1 - zeros[2] * w)
sings = [DeclaredSingularity("north", (z.real, z.imag), 0.15) for z in zeros]
alpha = section_map(fubini_study_bundle(S, 3), {"north": north, "south": south},
                    sings)
print("equivariance residual:", equivariance_residual(alpha))

# 5) least-squares inverse: beta alpha = 1 off the zeros
beta = least_squares_inverse(alpha)
pts = np.array([[1.3, 0.9], [-0.8, -0.5], [0.2, -1.1]])
ba = beta.at("north", pts) @ alpha.at("north", pts)
print("beta.alpha - 1:", np.max(np.abs(ba - 1.0)))

# undeclared singularity is refused
try:
    alpha_bad = section_map(fubini_study_bundle(S, 3),
                            {"north": north, "south": south}, sings[:1])
    least_squares_inverse(alpha_bad).at("north",
        np.array([[zeros[1].real + 1e-9, zeros[1].imag]]))
    print("UNDETECTED singular evaluation!")
except Exception as e:
    print("refused:", type(e).__name__)

# 6) smoothed beta, algebraic mode closed form (alpha*alpha + s)^-1 alpha*
for m in MODES.values():
    validate_mode(m)
print("modes validated")
mode = MODES["algebraic"]
s = 0.37
bs = smoothed_beta(alpha, mode, s)
pts2 = np.array([[0.71, 0.01], [0.2, 0.3], [-1.0, 2.0], [0.0, 0.0]])
adj = adjoint_map(alpha)
a = alpha.at("north", pts2); astar = adj("north", pts2)
closed = np.linalg.inv(astar @ a + s * np.eye(1)[None]) @ astar
print("algebraic closed-form residual:", np.max(np.abs(bs.at("north", pts2) - closed)))

# value at the declared zero itself: chi'(0)/s * astar = astar/s for algebraic
at0 = smoothed_beta(alpha, mode, s).at("north",
        np.array([[zeros[0].real, zeros[0].imag]]))
print("beta_s at zero (finite):", np.abs(at0).max())

# compact mode: beta_s vanishes identically where |a|^2 << s? no: chi(t)=0 for t<=0 only.
# but compact => alpha beta_s = 1 exactly where |a|^2 >= s
bs_c = smoothed_beta(alpha, MODES["compact"], 0.01)
far = np.array([[1.5, 1.5]])
print("compact mode a.beta_s - 1 far out:",
      np.max(np.abs(alpha.at("north", far) @ bs_c.at("north", far) - 1.0)))

# 7) transplanted connections: line bundle identity  ->omega_s = omega_F - chi_s sigma
F = fubini_study_bundle(S, 3)
alphaF = section_map(F, {"north": north, "south": south}, sings)
push = pushforward_connection(alphaF, bs)
# predicted: omega_F - chi_s * sigma,  sigma = da/a + omega_F - omega_E (omega_E = 0)
ptsn = np.array([[0.9, 0.4], [-0.6, 1.2], [0.3, -0.2]])
h = 1e-6
def da_axis(axis):
    e = np.zeros(2); e[axis] = h
    return (north(ptsn + e) - north(ptsn - e)) / (2 * h)
aval = north(ptsn)
chi_s = (np.abs(aval) ** 2 * np.array([(F.metric.at("north", ptsn)[0][:,0,0]).real])[0] / 1.0)
# careful: alpha*alpha = h_E^{-1} |a|^2 h_F with h_E = 1 -> t = |a|^2 h_F / s
hF = F.metric.at("north", ptsn)[0][:, 0, 0].real
t = np.abs(aval) ** 2 * hF / s
chis = mode.chi(t)
omF = F.connection.at("north", ptsn)
got = push.connection.at("north", ptsn)
worst = 0.0
for axis in range(2):
    mask = 1 << axis
    sig = da_axis(axis) / aval + omF[mask][:, 0, 0]
    pred = omF[mask][:, 0, 0] - chis * sig
    worst = max(worst, np.max(np.abs(got[mask][:, 0, 0] - pred)))
print("pushforward line identity residual:", worst)

# 8) endpoint: s huge -> ->omega ~ omega_F? as s->inf chi->0, beta_s->0, push->omega_F.
bs_inf = smoothed_beta(alphaF, mode, 1e8)
push_inf = pushforward_connection(alphaF, bs_inf)
res = 0.0
for mask, v in push_inf.connection.at("north", ptsn).items():
    res = max(res, np.max(np.abs(v - omF[mask])))
print("s=1e8 push vs omega_F:", res)

# and s tiny -> curvature of push ~ curvature of E (flat: 0) away from zeros
bs_0 = smoothed_beta(alphaF, mode, 1e-8)
push_0 = pushforward_connection(alphaF, bs_0)
om0 = push_0.connection.at("north", ptsn)
sig_pred = []
for axis in range(2):
    mask = 1 << axis
    sig = da_axis(axis) / aval + omF[mask][:, 0, 0]
    sig_pred.append(np.max(np.abs(om0[mask][:, 0, 0] - (omF[mask][:, 0, 0] - sig))))
print("s=1e-8 push vs omega_F - sigma:", max(sig_pred))

# 9) pullback square-invertible case: gauge equivalence of curvature
T2 = build_standard_manifold("torus2", resolution=32)
E = flat_bundle(T2, 2)
Ft = flat_bundle(T2, 2)
import numpy.linalg as la
def amat(pts):
    x, y = pts[:, 0], pts[:, 1]
    n = len(pts)
    m = np.zeros((n, 2, 2), dtype=complex)
    m[:, 0, 0] = 2.0 + np.sin(2 * np.pi * x)
    m[:, 0, 1] = 0.3 * np.exp(2j * np.pi * y)
    m[:, 1, 0] = 0.1 * np.cos(2 * np.pi * (x + y))
    m[:, 1, 1] = 2.0 - 0.4 * np.cos(2 * np.pi * y)
    return m
alpha2 = BundleMapT = None
from chernweil.bundles import BundleMap
alpha2 = BundleMap(E, Ft, {"t": amat})
beta2 = least_squares_inverse(alpha2)
pull = pullback_connection(alpha2, beta2)
Om = curvature(pull)
ptst = np.random.default_rng(3).uniform(0.1, 0.9, size=(20, 2))
vals = Om.at("t", ptst)
# curvature of pull on invertible square alpha = alpha^{-1} Omega_F alpha = 0 here
print("pullback curvature (flat target):", max(np.max(np.abs(v)) for v in vals.values()) if vals else 0.0)

# 10) atomicity diagnostic
rep = atomicity_diagnostic(alpha, orders=(1,))
print("a(z)=prod(z-zi) diag:", rep.trends, [f"{v:.3e}" for v in rep.integrals[1]])

def flat_north(pts):
    z = pts[:, 0] + 1j * pts[:, 1]
    r2 = np.abs(z) ** 2
    out = np.where(r2 > 0, np.exp(-1.0 / np.maximum(r2, 1e-300)), 0.0)
    return out.astype(complex)
def flat_south(pts):
    w = pts[:, 0] + 1j * pts[:, 1]
    ww = np.abs(w) ** 2
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(ww > 0, np.exp(-ww), 0.0)   # placeholder, unused charts
    return out.astype(complex) * 0 + 1.0
alpha_flat = section_map(flat_bundle(S, 1), {"north": flat_north, "south": flat_south},
                         [DeclaredSingularity("north", (0.0, 0.0), 0.3)])
rep2 = atomicity_diagnostic(alpha_flat, orders=(1,))
print("flat zero diag:", rep2.trends, [f"{v:.3e}" for v in rep2.integrals[1]])
