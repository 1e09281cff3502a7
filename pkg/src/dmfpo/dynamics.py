"""Entanglement dynamics under the DM-XY Hamiltonian.

Times here are in Pauli units (``U = exp(-i tau H)``).  The decomposition
method converts to the spin units the gate surfaces are written in.
"""

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .core import I2, SZ, concurrence, kron2
from .exceptions import DegenerateReference
from .model import TIME_SCALE, dm_propagator
from .sequence import compile, decomposition_full

METHODS = ("exact", "decomposition")
#: Preservation operator ``I (x) Z``; it anticommutes with the Hamiltonian.
PRESERVE_OP = kron2(I2, SZ)
DEGENERATE_TOL = 1e-6
# hardware-noise AED figures from NMR runs, kept for reference only
REFERENCE_AED_DYNAMICS = 3.83
REFERENCE_AED_PRESERVATION = 2.0


@dataclass(frozen=True)
class Trajectory:
    """Sampled concurrence curve; ``points`` holds ``(tau, concurrence, state)``."""

    points: tuple
    method: str
    gamma: float

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        taus = self.taus
        if np.any(np.diff(taus) <= 0):
            raise ValueError("trajectory taus must be strictly increasing")

    @property
    def taus(self):
        return np.array([p[0] for p in self.points], dtype=float)

    @property
    def concurrences(self):
        return np.array([p[1] for p in self.points], dtype=float)

    @property
    def states(self):
        return np.array([p[2] for p in self.points])

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class AEDResult:
    n: int
    value_percent: float
    per_point: tuple

    def to_json(self):
        return json.dumps({"schema": 1, "n": self.n, "value_percent": self.value_percent,
                           "per_point": list(self.per_point)}, indent=2) + "\n"


def _check_method(method):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def step_unitary(gamma, tau, method="exact"):
    """``U(gamma, tau)`` from the exact propagator or the compiled decomposition."""
    _check_method(method)
    if method == "exact":
        return dm_propagator(gamma, tau)
    # surfaces take spin-unit time
    spin_tau = tau * TIME_SCALE["pauli"] / TIME_SCALE["spin"]
    return compile(decomposition_full(gamma, spin_tau))


def _normalise(psi):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (4,):
        raise ValueError(f"state must have 4 amplitudes, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > 1e-10:
        raise ValueError(f"state is not normalised (norm {norm:.12g})")
    return psi


def evolve_state(psi0, gamma, tau, method="exact"):
    """State after evolving ``psi0`` for ``tau``; renormalised to guard rounding."""
    psi = step_unitary(gamma, tau, method) @ _normalise(psi0)
    return psi / np.linalg.norm(psi)


def _c(psi):
    return min(1.0, concurrence(psi))


def concurrence_trajectory(psi0, gamma, tau_list, method="exact"):
    taus = np.asarray(tau_list, dtype=float)
    points = tuple((float(t), _c(s), s)
                   for t, s in ((t, evolve_state(psi0, gamma, t, method)) for t in taus))
    return Trajectory(points, method, float(gamma))


def preservation_trajectory(psi0, gamma, seg_tau, n_cycles, method="exact"):
    """Evolution interrupted by ``O = I (x) Z`` after every segment.

    One cycle is ``O U O U``.  The state is recorded after each ``U`` then ``O``
    half-cycle, so full-cycle boundaries sit at even indices.  Since ``O``
    flips the sign of the Hamiltonian, ``O U O = U^dagger`` and every full
    cycle returns the state to ``psi0``.
    """
    if n_cycles < 0:
        raise ValueError("n_cycles must be >= 0")
    if seg_tau <= 0:
        raise ValueError("seg_tau must be positive")
    psi = _normalise(psi0)
    half = PRESERVE_OP @ step_unitary(gamma, seg_tau, method)
    points = [(0.0, _c(psi), psi)]
    for k in range(1, 2 * n_cycles + 1):
        psi = half @ psi
        psi = psi / np.linalg.norm(psi)
        points.append((k * float(seg_tau), _c(psi), psi))
    return Trajectory(tuple(points), method, float(gamma))


def aed(experimental, theoretical):
    """Average relative deviation in percent: ``100/n * sum |e - t| / t``.

    Raises
    ------
    DegenerateReference
        If any reference value is below 1e-6 in magnitude.
    """
    e = np.asarray(experimental, dtype=float)
    t = np.asarray(theoretical, dtype=float)
    if e.shape != t.shape or e.ndim != 1 or len(e) == 0:
        raise ValueError("need two equal-length, non-empty 1-D sequences")
    if np.any(np.abs(t) < DEGENERATE_TOL):
        raise DegenerateReference("reference concurrence too close to zero")
    per = np.abs(e - t) / np.abs(t)
    return AEDResult(len(e), float(100.0 * per.mean()), tuple(float(v) for v in per))


def singlet_min_concurrence(gamma):
    """Analytic minimum of the singlet's concurrence curve, ``1/sqrt(1+gamma^2)``."""
    return 1.0 / math.sqrt(1.0 + gamma * gamma)


def write_trajectories(path, trajectories):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "concurrence", "method", "gamma"])
        for tr in trajectories:
            for tau, c, _ in tr.points:
                w.writerow([repr(tau), repr(c), tr.method, repr(tr.gamma)])


def read_trajectories(path):
    """Rows of the trajectory CSV as ``(tau, concurrence, method, gamma)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        return [(float(r["tau"]), float(r["concurrence"]), r["method"], float(r["gamma"]))
                for r in csv.DictReader(fh)]
