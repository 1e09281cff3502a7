"""Re-derive decomposition A with the genetic optimiser, then fit surfaces.

1. Run a GA at every node of a gamma x tau grid for the two free angles.
2. Fit closed-form surfaces through the node optima.
3. Check the fitted sequence over a finer grid.

Run:  python3 demos/03_rederive_angles.py
"""

import time

from dmfpo import fitting, fpo, seqio
from dmfpo.sequence import structure_a

from _common import out

# %% Pointwise optimisation on a 7 x 7 grid.  Angles are canonicalised so
# neighbouring nodes sit on the same branch.
skel = fpo.skeleton_a()
ga, ta = fpo.grid_axes(7, 7)
nodes = [(g, t) for g in ga for t in ta]
t0 = time.perf_counter()
results = fpo.optimize_pointwise(skel, nodes)
worst = min(r.fidelity for r in results)
print(f"{len(results)} nodes in {time.perf_counter() - t0:.1f} s, worst fidelity {worst:.8f}")
fitting.write_angle_table(out("angles_a.csv"), results, skel)

# %% Fit theta1 with a trig-in-gamma times tau form and theta2 with a sum of
# two exponentials in gamma.
fits = fitting.fit_angle_surfaces(fitting.table_from_nodes(results, skel))
for slot, f in fits.items():
    print(f"{slot} = {f.expression.to_text()}  (rms {f.rms:.2e})")

# %% Plug the fitted surfaces back into the sequence and validate.
seq = structure_a(fits["theta1"].expression, fits["theta2"].expression,
                  name="decomposition_A_fit", source="ga-derived")
seqio.dump(seq, out("decomposition_a_fit.seq"))
prof = fpo.profile(seq, *fpo.grid_axes(31, 31))
print(f"fitted sequence: min fidelity {prof.min:.8f} over 31 x 31")
