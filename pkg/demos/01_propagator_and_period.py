"""Exact evolution under the DM-XY Hamiltonian and its recurrence time.

Run:  python3 demos/01_propagator_and_period.py
"""

import math

import numpy as np

from dmfpo import HamiltonianKind, find_period, propagator
from dmfpo.core import gate_fidelity
from dmfpo.fitting import fit_period_cubic
from dmfpo.model import REFERENCE_PERIOD_POLY, hamiltonian

# %% The Hamiltonian is (XX + YY) + gamma (XY - YX).  It kills |00> and |11>
# and mixes |01>, |10> with eigenvalues +-2 sqrt(1 + gamma^2).
g = 0.5
print("spectrum at gamma=0.5:", np.round(np.linalg.eigvalsh(hamiltonian(HamiltonianKind.dm_xy(g))), 6))

# %% Because of that spectrum the propagator returns to the identity (up to
# a global phase) after pi / sqrt(1 + gamma^2).
p = find_period(g)
u = propagator(HamiltonianKind.dm_xy(g), p)
print(f"period {p:.8f} (closed form {math.pi / math.sqrt(1 + g * g):.8f}), "
      f"fidelity with I: {gate_fidelity(u, np.eye(4)):.12f}")

# %% Pulse sequences are written in spin-1/2 time, four times the Pauli
# clock.  A cubic through the spin-unit periods reproduces the reference fit.
gammas = np.linspace(0, 1, 21)
periods = np.array([find_period(x, units="spin") for x in gammas])
cubic, _ = fit_period_cubic(gammas, periods)
ref = REFERENCE_PERIOD_POLY(gammas)
print("least-squares cubic:", np.round(cubic.coefficients, 4))
print(f"max relative gap to the reference cubic: {np.max(np.abs(periods - ref) / ref):.2e}")
