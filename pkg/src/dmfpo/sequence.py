"""Pulse sequences and the closed-form decompositions of the DM-XY propagator.

A :class:`PulseSequence` lists elements in *written* order, the way an
operator product is written: the leftmost element acts last on a state.
:func:`compile` multiplies the element unitaries accordingly.

The decompositions use the spin-1/2 time convention, i.e.
``compile(decomposition_a(), g, t)`` approximates
``propagator(HamiltonianKind.dm_xy(g), t, units="spin")``.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import expr as ex
from .core import I4, sqr, uzz, zrot
from .exceptions import BadQubitIndex, EvalError, GammaOutOfRange, UnsupportedSystem
from .model import HamiltonianKind, dm_propagator, find_period, propagator

PI = ex.PI


@dataclass(frozen=True)
class SQR:
    """In-plane rotation ``R^qubit(theta, phi)``."""

    qubit: int
    theta: ex.Expr
    phi: ex.Expr

    def __post_init__(self):
        _check_qubit(self.qubit)
        object.__setattr__(self, "theta", ex.as_expr(self.theta))
        object.__setattr__(self, "phi", ex.as_expr(self.phi))

    def unitary(self, gamma, tau, genes=None):
        return sqr(self.qubit, ex.evaluate(self.theta, gamma, tau, genes),
                   ex.evaluate(self.phi, gamma, tau, genes))

    def exprs(self):
        return (self.theta, self.phi)


@dataclass(frozen=True)
class ZZ:
    """ZZ evolution ``exp(-i angle Z1 Z2)``."""

    angle: ex.Expr

    def __post_init__(self):
        object.__setattr__(self, "angle", ex.as_expr(self.angle))

    def unitary(self, gamma, tau, genes=None):
        return uzz(ex.evaluate(self.angle, gamma, tau, genes))

    def exprs(self):
        return (self.angle,)


@dataclass(frozen=True)
class ZAxis:
    """z-axis rotation ``exp(-i theta/2 Z_qubit)``."""

    qubit: int
    theta: ex.Expr

    def __post_init__(self):
        _check_qubit(self.qubit)
        object.__setattr__(self, "theta", ex.as_expr(self.theta))

    def unitary(self, gamma, tau, genes=None):
        return zrot(self.qubit, ex.evaluate(self.theta, gamma, tau, genes))

    def exprs(self):
        return (self.theta,)


@dataclass(frozen=True)
class SysEvolve:
    """Free evolution under a system Hamiltonian for time ``t`` (Pauli units)."""

    kind: HamiltonianKind
    t: ex.Expr

    def __post_init__(self):
        if self.kind.tag not in ("zz", "xyz"):
            raise UnsupportedSystem(f"system evolution supports zz and xyz, not {self.kind.tag}")
        object.__setattr__(self, "t", ex.as_expr(self.t))

    def unitary(self, gamma, tau, genes=None):
        return propagator(self.kind, ex.evaluate(self.t, gamma, tau, genes))

    def exprs(self):
        return (self.t,)


def _check_qubit(q):
    if q not in (1, 2):
        raise BadQubitIndex(f"qubit index must be 1 or 2, got {q!r}")


@dataclass(frozen=True)
class PulseSequence:
    elements: tuple = ()
    name: str = ""
    source: str = "reference"
    gamma_range: tuple = (0.0, math.inf)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __add__(self, other):
        lo = max(self.gamma_range[0], other.gamma_range[0])
        hi = min(self.gamma_range[1], other.gamma_range[1])
        return PulseSequence(self.elements + other.elements, self.name, self.source, (lo, hi))

    def count(self, element_type):
        return sum(isinstance(e, element_type) for e in self.elements)

    def genes(self):
        return frozenset().union(*(x.genes() for e in self.elements for x in e.exprs()))

    def bind(self, gamma, tau):
        """Concrete copy with every angle folded to a constant."""
        return replace(self, elements=tuple(_bind_element(e, gamma, tau) for e in self.elements),
                       gamma_range=(0.0, math.inf))


def _bind_element(e, gamma, tau):
    if isinstance(e, SQR):
        return SQR(e.qubit, ex.bind(e.theta, gamma, tau), ex.bind(e.phi, gamma, tau))
    if isinstance(e, ZZ):
        return ZZ(ex.bind(e.angle, gamma, tau))
    if isinstance(e, ZAxis):
        return ZAxis(e.qubit, ex.bind(e.theta, gamma, tau))
    return SysEvolve(e.kind, ex.bind(e.t, gamma, tau))


def _substitute_element(e, genes):
    sub = ex.substitute_genes
    if isinstance(e, SQR):
        return SQR(e.qubit, sub(e.theta, genes), sub(e.phi, genes))
    if isinstance(e, ZZ):
        return ZZ(sub(e.angle, genes))
    if isinstance(e, ZAxis):
        return ZAxis(e.qubit, sub(e.theta, genes))
    return SysEvolve(e.kind, sub(e.t, genes))


def substitute_genes(seq, genes, source="ga-derived"):
    """Copy of ``seq`` with its gene slots replaced by numbers."""
    return replace(seq, elements=tuple(_substitute_element(e, genes) for e in seq.elements),
                   source=source)


def compile(seq, gamma=0.0, tau=0.0, genes=None):
    """Unitary of ``seq`` at (gamma, tau).

    ``gamma``, ``tau`` and the leading axes of ``genes`` broadcast together;
    the result has shape ``broadcast_shape + (4, 4)``.

    Raises
    ------
    GammaOutOfRange
        If some gamma lies outside the sequence's validity range.
    EvalError
        If an angle evaluates to a non-finite value.
    """
    g = np.asarray(gamma, dtype=float)
    lo, hi = seq.gamma_range
    if np.any(g < lo - 1e-12) or np.any(g > hi + 1e-12):
        raise GammaOutOfRange(f"{seq.name or 'sequence'} is valid for gamma in [{lo}, {hi}]")
    shape = np.broadcast_shapes(g.shape, np.shape(tau),
                                np.shape(genes)[:-1] if genes is not None else ())
    out = np.broadcast_to(I4, shape + (4, 4)).copy()
    # rightmost factor acts first
    for e in reversed(seq.elements):
        out = e.unitary(gamma, tau, genes) @ out
    return out


# -- reference decompositions ---------------------------------------------

#: Reference coefficients of the decomposition-A angle surfaces.
SURFACE_A = {
    "theta1": (0.8423, -0.3455, 1.117, 0.01806),   # trig_gamma(...) * tau
    "theta2": (1.345, -0.8731, 1.796, 0.0),        # exp2(...)
}

#: Reference coefficients of the decomposition-B angle surfaces.
SURFACE_B = {
    "theta": (0.09812, -2.42, 0.4023, 0.5524),     # exp2(...) * tau
    "offset1": 3.142,
    "theta2_shift": (1.242, -0.9617, 0.3546, -0.1145),
    "theta3": (1.259, -0.957, 3.479, -0.0087),
    "theta4": (1.256, -0.959, 1.912, -0.0166),
}


def structure_a(theta1, theta2, name="decomposition_A", source="reference"):
    """The nine-element A skeleton for arbitrary theta1/theta2 expressions.

    The first rotation acts on qubit 2; on qubit 1 the sequence would not
    reduce to the identity at tau = 0.
    """
    t1 = ex.as_expr(theta1)
    t2 = ex.as_expr(theta2)
    return PulseSequence((
        SQR(2, PI / 2, -(PI / 2)),
        SQR(1, PI / 2, t2),
        SQR(2, PI, PI),
        ZZ(PI / 4),
        SQR(1, t1, t2 + PI / 2),
        SQR(2, PI - t1, 0.0),
        ZZ(PI / 4),
        SQR(1, PI / 2, t2 + PI),
        SQR(2, PI / 2, PI / 2),
    ), name=name, source=source, gamma_range=(0.0, 1.0))


def structure_b(theta1, theta2, theta3, theta4, name="decomposition_B", source="reference"):
    """The eight-element B skeleton for arbitrary theta1..theta4 expressions."""
    t1, t2, t3, t4 = map(ex.as_expr, (theta1, theta2, theta3, theta4))
    return PulseSequence((
        SQR(1, PI / 2, PI / 2),
        SQR(2, PI / 2, t3),
        ZZ(PI / 4),
        SQR(1, t2 + t3, 0.0),
        SQR(2, t1, t4),
        ZZ(PI / 4),
        SQR(1, PI / 2, PI / 2),
        SQR(2, PI / 2, t3),
    ), name=name, source=source, gamma_range=(0.0, 1.0))


def angles_a():
    """theta1, theta2 of decomposition A as expressions."""
    theta1 = ex.linear_tau(ex.trig_gamma(*SURFACE_A["theta1"]))
    theta2 = ex.exp2(*SURFACE_A["theta2"])
    return theta1, theta2


def angles_b():
    """theta, theta1..theta4 of decomposition B as expressions."""
    s = SURFACE_B
    theta = ex.linear_tau(ex.exp2(*s["theta"]))
    theta1 = -theta + s["offset1"]
    theta2 = theta - ex.exp2(*s["theta2_shift"])
    theta3 = ex.exp2(*s["theta3"])
    theta4 = ex.exp2(*s["theta4"])
    return theta, theta1, theta2, theta3, theta4


def decomposition_a(gamma=None, tau=None):
    """Decomposition A of ``U(gamma, tau)``, 0 <= gamma <= 1, symbolic in (gamma, tau).

    Passing ``gamma`` only validates its range; the angles stay symbolic
    and are evaluated by :func:`compile`.
    """
    if gamma is not None and not 0.0 <= gamma <= 1.0:
        raise GammaOutOfRange(f"decomposition A needs 0 <= gamma <= 1, got {gamma}")
    return structure_a(*angles_a())


def decomposition_b(gamma_prime=None, tau_prime=None):
    """Decomposition B of ``U'(gamma', tau')`` (primed Hamiltonian), 0 <= gamma' <= 1."""
    if gamma_prime is not None and not 0.0 <= gamma_prime <= 1.0:
        raise GammaOutOfRange(f"decomposition B needs 0 <= gamma' <= 1, got {gamma_prime}")
    _, t1, t2, t3, t4 = angles_b()
    return structure_b(t1, t2, t3, t4)


def fold_tau(gamma, tau):
    """Reduce ``tau`` (spin units) into ``[0, P(gamma))``."""
    p = find_period(gamma, units="spin")
    r = math.fmod(tau, p)
    return r + p if r < 0 else r


def decomposition_full(gamma, tau):
    """Concrete sequence realising ``U(gamma, tau)`` for any gamma >= 0 and real tau.

    tau is first folded into one period; gamma <= 1 uses decomposition A,
    gamma > 1 uses decomposition B at ``(1/gamma, gamma * tau)``.
    """
    if not np.isfinite(gamma) or gamma < 0:
        raise GammaOutOfRange(f"gamma must be finite and >= 0, got {gamma}")
    if not np.isfinite(tau):
        raise EvalError(f"tau must be finite, got {tau}")
    t = fold_tau(gamma, tau)
    if gamma <= 1.0:
        seq = decomposition_a().bind(gamma, t)
    else:
        seq = decomposition_b().bind(1.0 / gamma, gamma * t)
    return replace(seq, name=f"decomposition_full(gamma={gamma!r}, tau={tau!r})")


def dispatch_branch(gamma):
    return "A" if gamma <= 1.0 else "B"


def target_a(gamma, tau):
    """Exact propagator approximated by decomposition A (spin units)."""
    return dm_propagator(gamma, tau, units="spin")


def target_b(gamma_prime, tau_prime):
    """Exact propagator approximated by decomposition B (spin units)."""
    return dm_propagator(gamma_prime, tau_prime, primed=True, units="spin")


def isolate_zz(sys=None, t=0.0):
    """Term-isolation sequence leaving only the ZZ part of ``sys``.

    ``Z1(pi) . U_sys(t) . Z1(pi) . U_sys(t)`` equals ``uzz(2 j t)`` up to a
    global phase for ``sys = xyz(j)`` or ``zz(j)``: conjugating by a
    z-rotation on qubit 1 flips the sign of XX and YY and leaves ZZ alone.

    Raises
    ------
    UnsupportedSystem
        For any system other than ``xyz`` or ``zz``.
    """
    if sys is None:
        sys = HamiltonianKind.xyz(1.0)
    if sys.tag not in ("xyz", "zz"):
        raise UnsupportedSystem(f"term isolation supports xyz and zz systems, not {sys.tag}")
    return PulseSequence((
        ZAxis(1, PI),
        SysEvolve(sys, t),
        ZAxis(1, PI),
        SysEvolve(sys, t),
    ), name="isolate_zz", source="reference")


def isolated_zz_angle(sys, t):
    """Effective ``J_zz t`` produced by :func:`isolate_zz`."""
    return 2.0 * sys.strength * t
