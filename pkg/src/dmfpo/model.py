"""Hamiltonians of the DM + Heisenberg-XY problem and their exact propagators.

Hamiltonians are built from Pauli matrices in units of the XY coupling
``J``, so ``tau = J t``.  The fitted pulse-sequence surfaces work in the
spin-1/2 convention (operators ``S = sigma / 2``), where the same physical
evolution needs four times the ``tau``; ``units="spin"`` selects it.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .core import dagger, eigh_hermitian, gate_fidelity, pauli2
from .exceptions import NoPeriodFound

#: tau multiplier applied to the Pauli-form Hamiltonian for each time convention
TIME_SCALE = {"pauli": 1.0, "spin": 0.25}

XX_YY = pauli2("XX") + pauli2("YY")
XY_YX = pauli2("XY") - pauli2("YX")
ZZ = pauli2("ZZ")


def time_scale(units):
    try:
        return TIME_SCALE[units]
    except KeyError:
        raise ValueError(f"units must be one of {sorted(TIME_SCALE)}, got {units!r}") from None


@dataclass(frozen=True)
class EvolutionParams:
    gamma: float
    tau: float

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")
        if not np.isfinite(self.tau):
            raise ValueError(f"tau must be finite, got {self.tau}")


@dataclass(frozen=True)
class HamiltonianKind:
    """Tagged Hamiltonian family with its single strength parameter.

    ``tag`` is one of ``"dm_xy"``, ``"dm_xy_primed"``, ``"zz"``, ``"xyz"``.
    """

    tag: str
    strength: float

    TAGS = ("dm_xy", "dm_xy_primed", "zz", "xyz")

    def __post_init__(self):
        if self.tag not in self.TAGS:
            raise ValueError(f"unknown Hamiltonian tag {self.tag!r}")
        if not np.isfinite(self.strength):
            raise ValueError("Hamiltonian parameter must be finite")

    @classmethod
    def dm_xy(cls, gamma):
        return cls("dm_xy", float(gamma))

    @classmethod
    def dm_xy_primed(cls, gamma_prime):
        return cls("dm_xy_primed", float(gamma_prime))

    @classmethod
    def zz(cls, j_zz):
        return cls("zz", float(j_zz))

    @classmethod
    def xyz(cls, j):
        return cls("xyz", float(j))


def hamiltonian(kind):
    """Dense 4x4 Hamiltonian for ``kind``.

    * ``dm_xy(g)``:        ``(XX + YY) + g (XY - YX)``
    * ``dm_xy_primed(g)``: ``g (XX + YY) + (XY - YX)``
    * ``zz(j)``:           ``j ZZ``
    * ``xyz(j)``:          ``j (XX + YY + ZZ)``
    """
    g = kind.strength
    if kind.tag == "dm_xy":
        return XX_YY + g * XY_YX
    if kind.tag == "dm_xy_primed":
        return g * XX_YY + XY_YX
    if kind.tag == "zz":
        return g * ZZ
    return g * (XX_YY + ZZ)


@lru_cache(maxsize=256)
def _spectrum(kind):
    evals, vecs = eigh_hermitian(hamiltonian(kind))
    evals.setflags(write=False)
    vecs.setflags(write=False)
    return evals, vecs


def propagator(kind, tau, units="pauli"):
    """``exp(-i H tau')`` with ``tau' = tau`` (Pauli) or ``tau / 4`` (spin-1/2).

    ``tau`` may be an array; the result has shape ``tau.shape + (4, 4)``.
    """
    evals, vecs = _spectrum(kind)
    t = np.asarray(tau, dtype=float) * time_scale(units)
    phases = np.exp(-1j * t[..., None] * evals)
    return (vecs * phases[..., None, :]) @ vecs.conj().T


def dm_propagator(gamma, tau, primed=False, units="pauli"):
    """Propagator of the DM-XY family, broadcasting over ``gamma`` and ``tau``.

    ``primed`` selects ``g (XX + YY) + (XY - YX)`` instead of
    ``(XX + YY) + g (XY - YX)``.
    """
    g, t = np.broadcast_arrays(np.asarray(gamma, dtype=float), np.asarray(tau, dtype=float))
    g = g[..., None, None]
    h = g * XX_YY + XY_YX if primed else XX_YY + g * XY_YX
    evals, vecs = np.linalg.eigh(h)
    phases = np.exp(-1j * (t * time_scale(units))[..., None] * evals)
    return (vecs * phases[..., None, :]) @ dagger(vecs)


def _identity_distance(evals, p):
    """1 - F(exp(-i H p), I), vectorised over ``p``."""
    p = np.asarray(p, dtype=float)
    return 1.0 - np.abs(np.exp(-1j * p[..., None] * evals).sum(axis=-1)) / len(evals)


@lru_cache(maxsize=1024)
def _period_pauli(gamma, tol, bound, step):
    evals, _ = _spectrum(HamiltonianKind.dm_xy(gamma))
    grid = np.arange(1, int(np.ceil(bound / step)) + 1) * step
    d = _identity_distance(evals, grid)
    interior = np.flatnonzero((d[1:-1] <= d[:-2]) & (d[1:-1] <= d[2:]) & (d[1:-1] < 1e-3)) + 1
    for i in interior:
        res = minimize_scalar(lambda p: float(_identity_distance(evals, p)),
                              bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun <= tol:
            return float(res.x)
    raise NoPeriodFound(f"no period of U(gamma={gamma}) below {bound}")


def find_period(gamma, tol=1e-8, bound=20.0, units="pauli", step=1e-3):
    """Smallest ``P > 0`` with ``U(tau + P) = U(tau)`` up to a global phase.

    The phase-insensitive distance ``1 - F`` is scanned on a grid of spacing
    ``step`` up to ``bound`` (in the requested units); the first local
    minimum below ``tol`` after bounded refinement is returned.

    Raises
    ------
    NoPeriodFound
        If no such ``P`` exists below ``bound``.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = time_scale(units)
    p = _period_pauli(float(gamma), float(tol), float(bound) * scale, float(step) * scale)
    kind = HamiltonianKind.dm_xy(gamma)
    taus = np.linspace(-3.0, 7.0, 5)
    f = gate_fidelity(propagator(kind, taus + p), propagator(kind, taus))
    if np.min(f) < 1 - max(tol, 1e-10) * 10:
        raise NoPeriodFound(f"candidate period {p} failed the sampled-tau check")
    return p / scale


@dataclass(frozen=True)
class PeriodPoly:
    """Cubic ``c3 g^3 + c2 g^2 + c1 g + c0``."""

    c3: float
    c2: float
    c1: float
    c0: float

    def __call__(self, gamma):
        return period_fit_eval(self, gamma)

    @property
    def coefficients(self):
        return (self.c3, self.c2, self.c1, self.c0)


#: Reference cubic fit of the propagator period (spin-1/2 time units).
REFERENCE_PERIOD_POLY = PeriodPoly(3.008, -6.627, -0.1498, 12.59)


def period_fit_eval(p, gamma):
    return np.polyval(p.coefficients, gamma)

