"""Decomposition of the Dzyaloshinsky-Moriya + XY two-qubit propagator.

Submodules: ``core`` (4x4 quantum primitives), ``model`` (Hamiltonians,
propagators, periods), ``expr``/``sequence``/``seqio`` (pulse sequences),
``fpo`` (genetic fidelity-profile optimisation), ``fitting`` (surface and
period fits), ``dynamics`` (concurrence and preservation), ``cli``.
"""

from .core import concurrence, expm_hermitian, gate_fidelity, singlet
from .exceptions import DMFPOError
from .model import HamiltonianKind, dm_propagator, find_period, propagator
from .sequence import (compile, decomposition_a, decomposition_b, decomposition_full,
                       isolate_zz)

__version__ = "0.1.0"

__all__ = [
    "DMFPOError", "HamiltonianKind", "compile", "concurrence", "decomposition_a",
    "decomposition_b", "decomposition_full", "dm_propagator", "expm_hermitian",
    "find_period", "gate_fidelity", "isolate_zz", "propagator", "singlet",
]
