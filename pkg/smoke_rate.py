import numpy as np
from chernweil.meshes import build_standard_manifold
from chernweil.bundles import fubini_study_bundle, section_map, DeclaredSingularity, MODES
from chernweil.battery import test_battery
from chernweil.currents import characteristic_current_limit

S = build_standard_manifold("cp1", resolution=64)
F1 = fubini_study_bundle(S, 1)
sing0 = [DeclaredSingularity("north", (0.0, 0.0), 0.2)]
a_z = section_map(F1, {"north": lambda pts: pts[:,0]+1j*pts[:,1],
                       "south": lambda pts: np.ones(len(pts), dtype=complex)},
                  sing0)

sched = [0.3, 0.1, 0.03, 0.01, 0.003, 0.001]
for mode_name in ("algebraic", "compact"):
    cur, rep = characteristic_current_limit("u", a_z, MODES[mode_name], sched,
                                            seed=3, include_away=False)
    tfs = test_battery(S, 0, seed=3, sigma=a_z.singular_points())
    print(f"== mode {mode_name}")
    for row in rep.rows:
        tf = [t for t in tfs if t.form_id == row.form_id][0]
        want = tf.form.at("north", np.array([[0.0,0.0]]))[0][0]
        p = np.array([v.real for v in row.pairings])
        errs = p - (want + row.zero_route.real)
        # empirical rate between consecutive s
        rates = []
        for i in range(len(sched)-1):
            if abs(errs[i+1]) > 1e-14 and abs(errs[i]) > 1e-14:
                rates.append(np.log(abs(errs[i]/errs[i+1]))/np.log(sched[i]/sched[i+1]))
        # aitken on last three
        p1, p2, p3 = p[-3], p[-2], p[-1]
        den = (p3 - p2) - (p2 - p1)
        aitken = p3 - (p3 - p2)**2/den if abs(den) > 1e-15 else p3
        print(f"  {row.form_id:11s} err(s)={[f'{e:+.1e}' for e in errs]} "
              f"rates={[f'{r:.2f}' for r in rates]} aitken_err={aitken-want:+.2e}")
