import numpy as np, time
from chernweil.meshes import build_standard_manifold
from chernweil.bundles import fubini_study_bundle, section_map, DeclaredSingularity
from chernweil.currents import spherical_potential

# Poincare-Lelong convergence over 3 refinement levels, O(2), zeros {0, inf}
for res in (64, 128, 256):
    S = build_standard_manifold("cp1", resolution=res)
    F2 = fubini_study_bundle(S, 2)
    sing2 = [DeclaredSingularity("north", (0.0, 0.0), 0.2),
             DeclaredSingularity("south", (0.0, 0.0), 0.2)]
    a2 = section_map(F2, {"north": lambda pts: pts[:,0]+1j*pts[:,1],
                          "south": lambda pts: pts[:,0]+1j*pts[:,1]}, sing2)
    t0 = time.time()
    r = spherical_potential(a2, "c1")
    print(f"res={res:4d} residual={r.residual:.3e} ({time.time()-t0:.1f}s) "
          f"worst={max(r.details, key=r.details.get)}")
