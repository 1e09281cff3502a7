"""How well do the closed-form pulse decompositions match the exact gate?

Writes a fidelity heat map for each decomposition to demos/output/.

Run:  python3 demos/02_validate_decompositions.py
"""

import numpy as np

from dmfpo import compile, decomposition_a, decomposition_b, decomposition_full, isolate_zz
from dmfpo import fpo, svg
from dmfpo.core import gate_fidelity, uzz
from dmfpo.model import HamiltonianKind, dm_propagator
from dmfpo.sequence import isolated_zz_angle

from _common import out

# %% Decomposition A: single-qubit rotations plus two ZZ evolutions, with
# angle surfaces in gamma and tau.  Scan the usual 31 x 31 grid.
ga, ta = fpo.grid_axes(31, 31)
prof_a = fpo.profile(decomposition_a(), ga, ta, "dm_xy")
print(f"A: min fidelity {prof_a.min:.6f} at gamma, tau = {prof_a.argmin}")
with open(out("decomposition_a.svg"), "w") as fh:
    fh.write(svg.heatmap(prof_a, 0.999, 1.0, "decomposition A"))

# %% Decomposition B targets the primed Hamiltonian (coupling ratio inverted),
# which covers the regime gamma > 1.
prof_b = fpo.profile(decomposition_b(), ga, ta, "dm_xy_primed")
print(f"B: min fidelity {prof_b.min:.6f}")
with open(out("decomposition_b.svg"), "w") as fh:
    fh.write(svg.heatmap(prof_b, 0.999, 1.0, "decomposition B"))

# %% decomposition_full picks A or B by gamma, so any coupling ratio works.
for g, t in [(0.3, 5.0), (2.5, 3.0), (6.0, 1.0)]:
    f = gate_fidelity(compile(decomposition_full(g, t)), dm_propagator(g, t, units="spin"))
    print(f"full: gamma={g}, tau={t}: fidelity {f:.8f}")

# %% The isolation sequence strips the XY part from a Heisenberg XYZ
# evolution, leaving a pure ZZ coupling.
sys, t = HamiltonianKind.xyz(1.0), 0.7
u = compile(isolate_zz(sys, t))
v = uzz(isolated_zz_angle(sys, t))
print(f"ZZ isolation fidelity: {gate_fidelity(u, v):.15f}")
