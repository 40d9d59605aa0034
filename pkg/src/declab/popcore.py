"""Product-operator and Hadamard-product algebra on dense 2^N x 2^N matrices.

Conventions
-----------
Spin operators are plain complex ``numpy`` arrays of shape ``(M, M)`` with
``M = 2**n_spins``. Spin 1 is the *leftmost* Kronecker factor, so it is the
most significant bit of a row/column index: for ``N = 2`` the index ``m = 1``
(binary ``01``) means spin 1 up, spin 2 down.

Pauli strings are words over ``{'1', 'x', 'y', 'z'}`` whose ``n``-th letter is
the factor on spin ``n``; ``"z1"`` is ``sigma_z`` on spin 1 and the identity on
spin 2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.linalg import hadamard as _sylvester

ATOL = 1e-10
MAX_SPINS = 10

SIGMA = {
    "1": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "e0": np.array([[1, 0], [0, 0]], dtype=complex),
    "e1": np.array([[0, 0], [0, 1]], dtype=complex),
}
PAULI_LABELS = "1xyz"


def n_spins_of(a) -> int:
    """Number of spins of a square ``2^N x 2^N`` array (or length-``2^N`` vector)."""
    a = np.asarray(a)
    if a.ndim not in (1, 2) or (a.ndim == 2 and a.shape[0] != a.shape[1]):
        raise ValueError(f"expected a square matrix or a vector, got shape {a.shape}")
    m = a.shape[0]
    n = m.bit_length() - 1
    if m < 2 or 2**n != m:
        raise ValueError(f"dimension {m} is not a power of two >= 2")
    return n


def _same_shape(*arrays):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")


def allclose(a, b, tol: float | None = None) -> bool:
    """Entrywise comparison within an absolute tolerance (default ``ATOL``)."""
    tol = ATOL if tol is None else tol
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= tol))


def make_pauli_term(n_spins: int, factors: Mapping[int, str] | Iterable[tuple[int, str]]) -> np.ndarray:
    """Kronecker product with the given single-spin factors, identity elsewhere.

    ``factors`` maps 1-based spin indices to one of ``x, y, z, e0, e1`` (or
    ``1``). ``e0 = (I + sigma_z)/2`` and ``e1 = (I - sigma_z)/2`` are the
    single-spin projectors onto |0> and |1>.
    """
    if not 1 <= n_spins <= MAX_SPINS:
        raise ValueError(f"n_spins must be in 1..{MAX_SPINS}, got {n_spins}")
    pairs = list(factors.items()) if isinstance(factors, Mapping) else list(factors)
    slots = ["1"] * n_spins
    seen = set()
    for spin, label in pairs:
        if not 1 <= spin <= n_spins:
            raise ValueError(f"spin index {spin} out of range 1..{n_spins}")
        if spin in seen:
            raise ValueError(f"duplicate factor for spin {spin}")
        if label not in SIGMA:
            raise ValueError(f"unknown factor {label!r}")
        seen.add(spin)
        slots[spin - 1] = label
    out = np.ones((1, 1), dtype=complex)
    for label in slots:
        out = np.kron(out, SIGMA[label])
    return out


def pauli_string(word: str) -> np.ndarray:
    """Product operator for a Pauli word such as ``"xz1"``."""
    if not word or any(c not in PAULI_LABELS for c in word):
        raise ValueError(f"invalid Pauli word {word!r}")
    return make_pauli_term(len(word), {i + 1: c for i, c in enumerate(word) if c != "1"})


def hadamard_product(a, b) -> np.ndarray:
    _same_shape(a, b)
    return np.asarray(a) * np.asarray(b)


def kron(a, b) -> np.ndarray:
    return np.kron(a, b)


@dataclass
class PauliExpansion:
    """Coefficients of an operator in the product-operator basis.

    ``coeffs`` holds every one of the ``4**n_spins`` words, zeros included.
    """

    n_spins: int
    coeffs: dict[str, complex] = field(default_factory=dict)

    def nonzero(self, tol: float | None = None) -> dict[str, complex]:
        tol = ATOL if tol is None else tol
        return {w: c for w, c in self.coeffs.items() if abs(c) > tol}

    def __getitem__(self, word: str) -> complex:
        return self.coeffs[word]


def pauli_words(n_spins: int) -> list[str]:
    return ["".join(p) for p in itertools.product(PAULI_LABELS, repeat=n_spins)]


def pauli_expand(a) -> PauliExpansion:
    """Expand ``a`` as ``sum_s c_s P_s`` with ``c_s = trace(P_s a) / M``."""
    a = np.asarray(a, dtype=complex)
    n = n_spins_of(a)
    m = a.shape[0]
    coeffs = {}
    for word in pauli_words(n):
        p = pauli_string(word)
        # trace(P A) = sum_ij P_ij A_ji
        coeffs[word] = complex(np.sum(p * a.T)) / m
    return PauliExpansion(n, coeffs)


def pauli_synth(expansion: PauliExpansion) -> np.ndarray:
    m = 2**expansion.n_spins
    out = np.zeros((m, m), dtype=complex)
    for word, c in expansion.coeffs.items():
        if c != 0:
            out += c * pauli_string(word)
    return out


def walsh_hadamard(n_spins: int) -> np.ndarray:
    """The +-1 Walsh-Hadamard matrix, ``H[i, j] = (-1)**popcount(i & j)``.

    Column ``m`` is the diagonal of the z-string ``sigma_z^m``.
    """
    return _sylvester(2**n_spins).astype(float)


def z_string(n_spins: int, m: int) -> np.ndarray:
    """The product ``prod_n (sigma_z^n)**bit_n(m)`` with spin 1 on the top bit."""
    return np.diag(walsh_hadamard(n_spins)[:, m]).astype(complex)


def diag_sigma_z_coeffs(d) -> np.ndarray:
    """Coefficients ``d'`` with ``Diag(d) = sum_m d'_m sigma_z^m``.

    Computed as ``W d / M`` with ``W`` the +-1 Walsh-Hadamard matrix.
    """
    d = np.asarray(d)
    n = n_spins_of(d)
    return walsh_hadamard(n) @ d / 2**n


def diagonal_sandwich(a, b, c) -> np.ndarray:
    """``Diag(a) B Diag(c)^dagger`` evaluated as ``(a c^dagger) (.) B``."""
    a, c, b = np.asarray(a), np.asarray(c), np.asarray(b)
    if a.shape != c.shape or b.shape != (a.shape[0], a.shape[0]):
        raise ValueError(f"dimension mismatch: a{a.shape}, B{b.shape}, c{c.shape}")
    return np.outer(a, c.conj()) * b


def hadamard_transform_op(n_spins: int) -> np.ndarray:
    """Unitary Hadamard transform ``H^1 ... H^N`` with ``H^n = (sigma_x^n + sigma_z^n)/sqrt 2``."""
    h = (SIGMA["x"] + SIGMA["z"]) / np.sqrt(2)
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n_spins):
        out = np.kron(out, h)
    return out


def is_diagonal(a, tol: float | None = None) -> bool:
    a = np.asarray(a)
    tol = ATOL if tol is None else tol
    return bool(np.all(np.abs(a - np.diag(np.diag(a))) <= tol))


def dyad_product_form(a_op, c_op) -> np.ndarray:
    """Outer product ``a c^dagger`` of two diagonals, built from operators.

    Uses ``A (M H E H) C^dagger`` where ``E = |0..0><0..0|`` and ``H`` is the
    unitary Hadamard transform; ``M H E H`` is the all-ones matrix.
    """
    a_op, c_op = np.asarray(a_op), np.asarray(c_op)
    _same_shape(a_op, c_op)
    if not (is_diagonal(a_op) and is_diagonal(c_op)):
        raise ValueError("dyad_product_form requires diagonal operators")
    n = n_spins_of(a_op)
    m = 2**n
    h = hadamard_transform_op(n)
    e = np.zeros((m, m), dtype=complex)
    e[0, 0] = 1
    return a_op @ (m * h @ e @ h) @ c_op.conj().T


def pauli_hadamard_table() -> dict[tuple[str, str], str]:
    """Hadamard products of single-spin Pauli matrices, named ``"0"``, ``"x"``, ``"-x"`` etc."""
    table = {}
    for a, b in itertools.product(PAULI_LABELS, repeat=2):
        prod = SIGMA[a] * SIGMA[b]
        if not prod.any():
            table[a, b] = "0"
            continue
        for label, sign in itertools.product(PAULI_LABELS, (1, -1)):
            if np.array_equal(prod, sign * SIGMA[label]):
                table[a, b] = label if sign == 1 else "-" + label
                break
        else:
            raise AssertionError(f"{a} (.) {b} is not a signed Pauli matrix")
    return table
