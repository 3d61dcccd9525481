"""Shared literal definitions used as independent oracles.

Everything here is built from hand-written arrays and explicit Kronecker
products, deliberately not reusing the package's vectorized paths, so tests
compare two independent constructions.
"""

import numpy as np
import pytest

SQ2 = np.sqrt(2.0)

#: Probe kets written out literally, in the package's canonical order.
KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([1, 1], dtype=complex) / SQ2,
    "A": np.array([1, -1], dtype=complex) / SQ2,
    "R": np.array([1, 1j], dtype=complex) / SQ2,
    "L": np.array([1, -1j], dtype=complex) / SQ2,
}
ORDER = ("H", "V", "D", "A", "R", "L")

U_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def proj(label: str) -> np.ndarray:
    ket = KETS[label]
    return np.outer(ket, ket.conj())


def povm_element(j: str, k: str, l: str, m: str) -> np.ndarray:
    """Measurement operator (P_j (x) P_k)^T (x) (P_l (x) P_m), built explicitly."""
    prep = np.kron(proj(j), proj(k)).T
    meas = np.kron(proj(l), proj(m))
    return np.kron(prep, meas)


def probability_table_bruteforce(chi: np.ndarray) -> np.ndarray:
    """36x36 outcome probabilities via explicit operator traces."""
    table = np.empty((36, 36))
    for n, (j, k) in enumerate((a, b) for a in ORDER for b in ORDER):
        for m, (l, mm) in enumerate((a, b) for a in ORDER for b in ORDER):
            table[n, m] = np.trace(povm_element(j, k, l, mm) @ chi).real
    return table


def random_psd_choi(rng: np.random.Generator, mix: float = 0.0) -> np.ndarray:
    """Random PSD 16x16 matrix, optionally mixed with identity for full rank."""
    a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    chi = a @ a.conj().T
    if mix > 0.0:
        chi = (1.0 - mix) * chi + mix * np.trace(chi).real * np.eye(16) / 16.0
    return chi


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
