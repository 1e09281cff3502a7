"""Two-qubit linear algebra: Paulis, propagators, fidelity and concurrence.

Conventions used throughout the package:

* qubit 1 is the left tensor factor, basis order ``|00>, |01>, |10>, |11>``;
* gate fidelity is ``|Tr(U^dagger V)| / 4`` (insensitive to global phase).

Gate builders accept numpy arrays for their angle arguments and broadcast,
returning stacks of shape ``(..., 4, 4)``.
"""

import numpy as np

from .exceptions import BadQubitIndex, InvalidDensity, NonHermitianInput

HERMITIAN_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I4 = np.eye(4, dtype=complex)

PAULI = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


def kron2(a, b):
    """Tensor product of two single-qubit operators, ``a`` acting on qubit 1."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def pauli2(label):
    """Two-qubit Pauli product from a label such as ``"XY"``."""
    return kron2(PAULI[label[0]], PAULI[label[1]])


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def is_hermitian(h, tol=HERMITIAN_TOL):
    h = np.asarray(h)
    return bool(np.max(np.abs(h - dagger(h)), initial=0.0) <= tol)


def is_unitary(u, tol=HERMITIAN_TOL):
    u = np.asarray(u)
    eye = np.eye(u.shape[-1])
    return bool(np.max(np.abs(dagger(u) @ u - eye)) <= tol)


def eigh_hermitian(h, tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix after a symmetry check."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, tol):
        raise NonHermitianInput(
            f"matrix is not Hermitian (max asymmetry {np.max(np.abs(h - dagger(h))):.3g})")
    return np.linalg.eigh(h)


def expm_hermitian(h, t=1.0):
    """Return ``exp(-i h t)`` for Hermitian ``h``.

    ``t`` may be an array; the result then has shape ``t.shape + (4, 4)``.
    """
    evals, vecs = eigh_hermitian(h)
    t = np.asarray(t, dtype=float)
    phases = np.exp(-1j * t[..., None] * evals)
    return (vecs * phases[..., None, :]) @ vecs.conj().T


def gate_fidelity(u, v):
    """Phase-insensitive overlap ``|Tr(u^dagger v)| / d``.

    Broadcasts over leading axes.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    d = u.shape[-1]
    overlap = np.einsum("...ij,...ij->...", np.conj(u), v)
    f = np.abs(overlap) / d
    return np.minimum(f, 1.0) if np.ndim(f) else float(min(f, 1.0))


def _single_qubit_rotation(theta, nx, ny, nz):
    """exp(-i theta/2 (n . sigma)) for a unit axis, broadcasting over theta."""
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    nx, ny, nz = np.broadcast_arrays(nx, ny, nz)
    shape = np.broadcast_shapes(theta.shape, nx.shape)
    r = np.empty(shape + (2, 2), dtype=complex)
    r[..., 0, 0] = c - 1j * s * nz
    r[..., 0, 1] = -1j * s * (nx - 1j * ny)
    r[..., 1, 0] = -1j * s * (nx + 1j * ny)
    r[..., 1, 1] = c + 1j * s * nz
    return r


def _embed(r, qubit):
    """Lift a stack of 2x2 operators onto qubit 1 or 2 of the register."""
    if qubit == 1:
        return np.einsum("...ij,kl->...ikjl", r, I2).reshape(r.shape[:-2] + (4, 4))
    if qubit == 2:
        return np.einsum("ij,...kl->...ikjl", I2, r).reshape(r.shape[:-2] + (4, 4))
    raise BadQubitIndex(f"qubit index must be 1 or 2, got {qubit!r}")


def sqr(n, theta, phi):
    """Single-qubit rotation by ``theta`` about the in-plane axis at azimuth ``phi``.

    ``exp(-i theta/2 [cos(phi) X_n + sin(phi) Y_n])`` on qubit ``n``.
    """
    if n not in (1, 2):
        raise BadQubitIndex(f"qubit index must be 1 or 2, got {n!r}")
    phi = np.asarray(phi, dtype=float)
    r = _single_qubit_rotation(theta, np.cos(phi), np.sin(phi), 0.0)
    return _embed(r, n)


def zrot(n, theta):
    """Rotation ``exp(-i theta/2 Z_n)`` about the z axis of qubit ``n``."""
    if n not in (1, 2):
        raise BadQubitIndex(f"qubit index must be 1 or 2, got {n!r}")
    return _embed(_single_qubit_rotation(theta, 0.0, 0.0, 1.0), n)


_ZZ_DIAG = np.array([1.0, -1.0, -1.0, 1.0])


def uzz(angle):
    """``exp(-i angle Z1 Z2)``; ``angle`` plays the role of ``J_zz t``."""
    angle = np.asarray(angle, dtype=float)
    out = np.zeros(angle.shape + (4, 4), dtype=complex)
    idx = np.arange(4)
    out[..., idx, idx] = np.exp(-1j * angle[..., None] * _ZZ_DIAG)
    return out


def basis_state(label):
    """Computational basis ket from a bit string, e.g. ``"01"``."""
    psi = np.zeros(4, dtype=complex)
    psi[int(label, 2)] = 1.0
    return psi


def singlet():
    """``(|01> - |10>) / sqrt(2)``."""
    return (basis_state("01") - basis_state("10")) / np.sqrt(2)


def product_state(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b))


def density(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


_YY = kron2(SY, SY)


def concurrence(rho, tol=1e-10):
    """Wootters concurrence of a two-qubit density matrix.

    A length-4 vector is accepted as a pure state.

    Raises
    ------
    InvalidDensity
        If ``rho`` is not Hermitian, unit-trace and positive semidefinite.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (4,):
        rho = density(rho / np.linalg.norm(rho))
    if rho.shape != (4, 4):
        raise InvalidDensity(f"expected a 4x4 density matrix, got shape {rho.shape}")
    if not is_hermitian(rho, 1e-10):
        raise InvalidDensity("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-10:
        raise InvalidDensity(f"trace is {np.trace(rho).real:.12g}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise InvalidDensity("density matrix has a negative eigenvalue")
    # lambdas are the singular values of T = V^T (YY) V with V the scaled
    # eigenvectors of rho; same as sqrt(eig(rho rho~)) without the sqrt that
    # turns 1e-17 rounding into 1e-9 errors for pure states
    w, v = np.linalg.eigh(rho)
    v = v * np.sqrt(np.clip(w, 0.0, None))
    lam = np.linalg.svd(v.T @ _YY @ v, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1:].sum()))
