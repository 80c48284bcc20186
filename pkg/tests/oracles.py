"""Independent reference implementations used only by the tests."""

from itertools import permutations
from math import comb

import numpy as np


def naive_permanent(M) -> complex:
    """Sum over all permutations, O(n! n)."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    return complex(sum(np.prod([M[i, p[i]] for i in range(n)]) for p in permutations(range(n))))


def count_basis(m: int, n: int) -> int:
    """Number of ways to put n photons in m modes, by recursion on the first mode."""
    if m == 1:
        return 1
    return sum(count_basis(m - 1, n - k) for k in range(n + 1))


def random_unitary(n: int, rng) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def ns_simplified_success(R: float, eta: float) -> float:
    """Heralded probability of the balanced one-photon branch: eta (1 - 2R)^2."""
    return eta * (1 - 2 * R) ** 2


def hom_coincidence(R: float, o: float) -> float:
    T = 1 - R
    return R * R + T * T - 2 * R * T * o * o


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
}


def eigenbasis(pauli: str):
    """Eigenvectors of a Pauli, +1 first."""
    w, v = np.linalg.eigh(PAULI[pauli])
    return [v[:, 1], v[:, 0]]  # eigh sorts ascending: -1 then +1


def binomial_check(n: int, k: int) -> int:
    return comb(n, k)
