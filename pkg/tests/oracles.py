"""Independent reference implementations used by the tests.

Nothing here imports the package: every oracle is written from first
principles so that agreement is evidence rather than tautology.
"""

import math

import numpy as np

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0 + 0j, -1.0])
I = np.eye(2, dtype=complex)


def taylor_expm(a):
    """exp(a) by scaling and squaring of a truncated Taylor series."""
    a = np.asarray(a, dtype=complex)
    norm = np.linalg.norm(a, 1)
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0.5 else 0
    b = a / 2 ** s
    term = np.eye(a.shape[0], dtype=complex)
    out = term.copy()
    for k in range(1, 30):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def dm_hamiltonian(gamma):
    """(XX + YY) + gamma (XY - YX), qubit 1 the left tensor factor."""
    return (np.kron(X, X) + np.kron(Y, Y)) + gamma * (np.kron(X, Y) - np.kron(Y, X))


def block_propagator(gamma, tau):
    """Closed form of exp(-i tau H) from the 2x2 block on span{|01>, |10>}.

    H annihilates |00> and |11>; on the block H = [[0, a], [conj(a), 0]] with
    a = 2 (1 + i gamma), whose square is |a|^2 times the identity.
    """
    a = 2 * (1 + 1j * gamma)
    r = abs(a)
    hb = np.array([[0, a], [np.conj(a), 0]])
    ub = math.cos(r * tau) * np.eye(2) - 1j * math.sin(r * tau) * hb / r
    u = np.eye(4, dtype=complex)
    u[1:3, 1:3] = ub
    return u


def fidelity(u, v):
    return abs(np.trace(u.conj().T @ v)) / u.shape[0]


def exact_angles_a(gamma, tau):
    """Angles for which the A skeleton reproduces the target exactly (spin-unit tau)."""
    return 0.5 * tau * math.sqrt(1 + gamma * gamma), math.pi - math.atan(gamma)


def pure_concurrence(psi):
    """|<psi| Y(x)Y |psi*>| for a normalised pure state."""
    psi = np.asarray(psi, dtype=complex)
    return abs(psi @ np.kron(Y, Y) @ psi)


def wootters_eigen(rho):
    """Textbook Wootters formula through the eigenvalues of rho (YY) rho* (YY)."""
    yy = np.kron(Y, Y)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.abs(np.sort(np.linalg.eigvals(r).real)[::-1]))
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def werner_concurrence(p):
    """Concurrence of p |singlet><singlet| + (1 - p) I/4."""
    return max(0.0, (3 * p - 1) / 2)


def singlet_concurrence_curve(gamma, tau):
    """Singlet concurrence from the block solution, Pauli-unit tau."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    return pure_concurrence(block_propagator(gamma, tau) @ psi)


def random_hermitian(rng, n=4, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


def random_state(rng, n=4):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)
