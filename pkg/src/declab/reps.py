"""Lindblad, superoperator, Kraus and extended-Kraus forms of diagonal channels.

Every channel here acts as ``rho -> w (.) rho`` for some damping matrix ``w``.
The representations are interchangeable:

* Lindblad: ``drho/dt = sum_n L_n rho L_n - 1/2 {L_n^2, rho}`` with real
  diagonal ``L_n``; the induced rates are ``1/2 sum_n (l_n[m] - l_n[m'])**2``.
* Kraus: ``sum_m K_m rho K_m^dagger`` with diagonal ``K_m`` taken from an
  eigendecomposition of ``w``.
* Extended Kraus: ``sum_{m,m'} c[m, m'] Z_m rho Z_m'`` over z-strings, with
  ``c = W w W / M**2`` and ``W`` the +-1 Walsh-Hadamard matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .gradflow import rates_from_lindblad_diagonal
from .popcore import is_diagonal, make_pauli_term, n_spins_of, walsh_hadamard


class NonPSDError(ValueError):
    """A damping or coefficient matrix is not positive-semidefinite."""


PSD_CLIP = 1e-10


def _check_rho(rho, n_spins):
    rho = np.asarray(rho)
    if rho.shape != (2**n_spins, 2**n_spins):
        raise ValueError(f"dimension mismatch: rho{rho.shape} for {n_spins} spins")
    return rho


@dataclass(frozen=True, eq=False)
class LindbladSet:
    """Real diagonal Lindblad operators (units sqrt(1/s))."""

    n_spins: int
    ops: tuple
    note: str = ""

    def __post_init__(self):
        ops = tuple(np.asarray(op, dtype=complex) for op in self.ops)
        for op in ops:
            if op.shape != (2**self.n_spins,) * 2:
                raise ValueError(f"Lindblad operator of shape {op.shape} for {self.n_spins} spins")
            if not is_diagonal(op, 1e-12) or np.abs(op - op.conj().T).max() > 1e-12:
                raise ValueError("Lindblad operators must be Hermitian and diagonal")
        object.__setattr__(self, "ops", ops)

    def diagonals(self) -> np.ndarray:
        return np.array([np.real(np.diag(op)) for op in self.ops]).reshape(len(self.ops), 2**self.n_spins)


@dataclass(frozen=True, eq=False)
class KrausSet:
    n_spins: int
    ops: tuple

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(np.asarray(op, dtype=complex) for op in self.ops))

    def completeness_error(self) -> float:
        """Max deviation of ``sum K^dagger K`` from the identity."""
        m = 2**self.n_spins
        acc = sum((k.conj().T @ k for k in self.ops), np.zeros((m, m), dtype=complex))
        return float(np.abs(acc - np.eye(m)).max())


@dataclass(frozen=True, eq=False)
class ExtendedKrausCoeffs:
    """Coefficients ``c[m, m']`` of ``sum c Z_m rho Z_m'`` (z-strings, spin 1 on the top bit)."""

    n_spins: int
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        if c.shape != (2**self.n_spins,) * 2:
            raise ValueError(f"coefficient matrix of shape {c.shape} for {self.n_spins} spins")
        object.__setattr__(self, "c", c)

    def is_psd(self, tol: float = PSD_CLIP) -> bool:
        return bool(np.linalg.eigvalsh((self.c + self.c.conj().T) / 2).min() >= -tol)

    def damping(self) -> np.ndarray:
        """The induced damping matrix ``W c W``."""
        wh = walsh_hadamard(self.n_spins)
        return wh @ self.c @ wh


@dataclass(frozen=True)
class CorrelatedRates:
    """Two-spin decoherence rates ``R1, R2 >= 0`` (1/s) and correlation ``S`` (1/s)."""

    R1: float
    R2: float
    S: float

    def __post_init__(self):
        if self.R1 < 0 or self.R2 < 0:
            raise ValueError(f"rates must be >= 0, got R1={self.R1}, R2={self.R2}")

    @property
    def admissible(self) -> bool:
        return self.S**2 <= self.R1 * self.R2 * (1 + 1e-12) + 1e-300

    def validate(self) -> "CorrelatedRates":
        if not self.admissible:
            bound = np.sqrt(self.R1 * self.R2)
            raise ValueError(f"correlation S={self.S} outside the admissible range [-{bound:g}, {bound:g}]")
        return self


# ---------------------------------------------------------------- Lindblad forms

def lindblad_from_generator(gen, D: float) -> LindbladSet:
    """Single Lindblad operator ``sqrt(2 D) Diag(lam)`` for a gradient generator."""
    if D < 0:
        raise ValueError(f"D must be >= 0, got {D}")
    lam = np.asarray(gen, dtype=float)
    n = n_spins_of(lam)
    return LindbladSet(n, (np.sqrt(2 * D) * np.diag(lam),))


def independent_lindblads(k: Sequence[float], D: float) -> LindbladSet:
    """``L_n = sqrt(D/2) k^n sigma_z^n``, one operator per spin."""
    if D < 0:
        raise ValueError(f"D must be >= 0, got {D}")
    n = len(k)
    ops = tuple(np.sqrt(D / 2) * kn * make_pauli_term(n, {i + 1: "z"}) for i, kn in enumerate(k))
    return LindbladSet(n, ops)


def correlated_sign_pattern(R1: float, R2: float, S: float) -> tuple[int, int, int, int]:
    """Signs of ``(a+, a-, b+, b-)`` for the two-spin correlated Lindblad pair.

    For ``R1 >= R2`` all roots are positive unless ``S**2 < R2 (R1 - R2) / 2``,
    where ``b-`` is negative; mirrored for ``R1 <= R2`` with ``a-``. Those rules
    assume ``S > 0``: for ``S < 0`` the all-positive branch takes both ``b``
    roots negative (the spin-2 mirror image of the ``|S|`` solution).
    """
    signs = [1, 1, 1, 1]
    if R1 >= R2:
        if S * S < R2 * (R1 - R2) / 2:
            signs[3] = -1
    elif S * S < R1 * (R2 - R1) / 2:
        signs[1] = -1
    if S < 0 and signs == [1, 1, 1, 1]:
        signs[2] = signs[3] = -1
    return tuple(signs)


def correlated_coefficients(R1: float, R2: float, S: float) -> tuple[float, float, float, float]:
    """Signed roots ``(a+, a-, b+, b-)`` with ``a±² = R1/2 ± S Δ``, ``b±² = R2/2 ± S Δ``.

    ``Δ = sqrt((R1 R2 - S²) / (4 S² + (R1 - R2)²))``.
    """
    if S == 0:
        raise ValueError("S = 0 is the uncorrelated case: use independent_lindblads instead")
    CorrelatedRates(R1, R2, S).validate()
    delta = np.sqrt(max(R1 * R2 - S * S, 0.0) / (4 * S * S + (R1 - R2) ** 2))
    squares = (R1 / 2 + S * delta, R1 / 2 - S * delta, R2 / 2 + S * delta, R2 / 2 - S * delta)
    roots = []
    for sq, sign in zip(squares, correlated_sign_pattern(R1, R2, S)):
        if sq < -1e-12 * max(R1, R2, 1e-300):
            raise ValueError(f"negative squared coefficient {sq}")
        roots.append(sign * np.sqrt(max(sq, 0.0)))
    return tuple(roots)


def correlated_two_spin_lindblads(rates: CorrelatedRates, convention: str = "lindblad") -> LindbladSet:
    """Two Lindblad operators ``a+ Z1 + b- Z2`` and ``a- Z1 + b+ Z2``.

    With ``convention="lindblad"`` the rates enter the coefficient formulas
    directly; the induced single-spin rates are then ``2 R1`` and ``2 R2`` and
    the double/zero-quantum rates ``2 (R1 + R2 ± 2 S)``.

    With ``convention="hadamard"`` the rates are read the way
    :func:`declab.gradflow.correlated_damping` reads them (coherence of spin n
    decays as ``e^{-Rn t}``), and are mapped to ``(R1/2, R2/2, S/4)`` first, so
    the resulting pair generates exactly that damping matrix.
    """
    if convention == "lindblad":
        R1, R2, S = rates.R1, rates.R2, rates.S
    elif convention == "hadamard":
        rates.validate()
        R1, R2, S = rates.R1 / 2, rates.R2 / 2, rates.S / 4
    else:
        raise ValueError(f"unknown convention {convention!r}")
    ap, am, bp, bm = correlated_coefficients(R1, R2, S)
    z1 = make_pauli_term(2, {1: "z"})
    z2 = make_pauli_term(2, {2: "z"})
    return LindbladSet(2, (ap * z1 + bm * z2, am * z1 + bp * z2))


def lindblads_for_correlated_damping(rates: CorrelatedRates) -> LindbladSet:
    """Lindblad set generating ``correlated_damping(R1, R2, S, t)`` for all t.

    Falls back to independent single-spin operators when ``S == 0``.
    """
    rates.validate()
    if rates.S == 0:
        ops = (np.sqrt(rates.R1 / 2) * make_pauli_term(2, {1: "z"}),
               np.sqrt(rates.R2 / 2) * make_pauli_term(2, {2: "z"}))
        return LindbladSet(2, ops, note="S = 0: independent single-spin Lindblad path")
    return correlated_two_spin_lindblads(rates, convention="hadamard")


def lindblad_rates(lset: LindbladSet) -> np.ndarray:
    """Rate matrix induced by a diagonal Lindblad set."""
    m = 2**lset.n_spins
    out = np.zeros((m, m))
    for ell in lset.diagonals():
        out += rates_from_lindblad_diagonal(ell)
    return out


def lindblad_rhs(rho, lset: LindbladSet) -> np.ndarray:
    rho = _check_rho(rho, lset.n_spins)
    out = np.zeros_like(rho, dtype=complex)
    for op in lset.ops:
        sq = op @ op
        out += op @ rho @ op - 0.5 * sq @ rho - 0.5 * rho @ sq
    return out


def superoperator_matrix(lset: LindbladSet) -> np.ndarray:
    """``1/2 sum_n (L_n^T (x) I - I (x) L_n)^2`` acting on column-stacked rho.

    Diagonal for diagonal ``L_n``; ``d vec(rho)/dt = -superop @ vec(rho)``.
    """
    m = 2**lset.n_spins
    eye = np.eye(m)
    out = np.zeros((m * m, m * m))
    for op in lset.ops:
        op = np.real(op)
        d = np.kron(op.T, eye) - np.kron(eye, op)
        out += 0.5 * d @ d
    return out


def evolve_lindblad(rho0, lset: LindbladSet, t: float) -> np.ndarray:
    """Exact evolution by the (diagonal) superoperator exponential."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    rho0 = _check_rho(rho0, lset.n_spins)
    decay = np.exp(-np.diag(superoperator_matrix(lset)) * t)
    vec = rho0.reshape(-1, order="F")
    return (decay * vec).reshape(rho0.shape, order="F")


def dense_lindbladian(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Generator ``G`` with ``d vec(rho)/dt = G vec(rho)`` for arbitrary ``L_n``.

    Column stacking; ``vec(A rho B) = (B^T (x) A) vec(rho)``.
    """
    ops = [np.asarray(op, dtype=complex) for op in ops]
    m = ops[0].shape[0]
    eye = np.eye(m)
    g = np.zeros((m * m, m * m), dtype=complex)
    for op in ops:
        ldl = op.conj().T @ op
        g += np.kron(op.conj(), op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye)
    return g


def evolve_dense(rho0, ops: Sequence[np.ndarray], t: float) -> np.ndarray:
    """Evolve under arbitrary Lindblad operators via a dense matrix exponential."""
    rho0 = np.asarray(rho0, dtype=complex)
    vec = expm(dense_lindbladian(ops) * t) @ rho0.reshape(-1, order="F")
    return vec.reshape(rho0.shape, order="F")


# ------------------------------------------------------------------- Kraus forms

def _fix_phase(v: np.ndarray) -> np.ndarray:
    # largest-magnitude entry made real positive; first index wins ties
    mags = np.round(np.abs(v), 12)
    j = int(np.argmax(mags))
    return v * (abs(v[j]) / v[j]) if v[j] != 0 else v


def kraus_from_damping(w, drop_tol: float = 1e-12) -> KrausSet:
    """Diagonal Kraus operators ``sqrt(kappa_m) Diag(k_m)`` from ``w = sum kappa k k^dagger``.

    Eigenvalues in ``[-1e-10, 0)`` are clipped to zero; eigenvalues at or below
    ``drop_tol`` produce no operator.

    Raises:
        NonPSDError: if ``w`` has an eigenvalue below ``-1e-10``.
    """
    w = np.asarray(w, dtype=complex)
    n = n_spins_of(w)
    herm = (w + w.conj().T) / 2
    vals, vecs = np.linalg.eigh(herm)
    if vals.min() < -PSD_CLIP:
        raise NonPSDError(f"damping matrix is not positive-semidefinite (min eigenvalue {vals.min():.3g})")
    vals = np.clip(vals, 0.0, None)
    ops = []
    for idx in np.argsort(-vals, kind="stable"):
        if vals[idx] <= drop_tol:
            continue
        k = _fix_phase(vecs[:, idx])
        ops.append(np.sqrt(vals[idx]) * np.diag(k))
    return KrausSet(n, tuple(ops))


def independent_kraus(survival: Sequence[float]) -> KrausSet:
    """``2^N`` operators ``sqrt(kappa_m / 2^N) Z_m`` with ``kappa_m = prod_n (1 + (-1)^bit p^n)``."""
    p = [float(x) for x in survival]
    for x in p:
        if not 0 <= x <= 1:
            raise ValueError(f"survival probability {x} outside [0, 1]")
    n = len(p)
    m = 2**n
    wh = walsh_hadamard(n)
    ops = []
    for idx in range(m):
        kappa = 1.0
        for spin in range(n):
            bit = (idx >> (n - 1 - spin)) & 1
            kappa *= 1 + (-1) ** bit * p[spin]
        ops.append(np.sqrt(kappa / m) * np.diag(wh[:, idx]))
    return KrausSet(n, tuple(ops))


def collective_two_spin_kraus(p: float) -> KrausSet:
    """Three diagonal Kraus operators for collective two-spin dephasing.

    Reproduces the damping matrix with entries ``1, p, p**4`` for Hamming-weight
    differences ``0, 1, 2``:

    * ``A1 = ((1 + p) I + (p - 1) Z1 Z2) / 2``
    * ``A2 = (1 - p**2) / (2 sqrt 2) (I + Z1 Z2)``
    * ``A3 = sqrt((1 - p**4) / 8) (Z1 + Z2)``
    """
    if not 0 <= p <= 1:
        raise ValueError(f"survival probability {p} outside [0, 1]")
    eye = np.eye(4)
    zz = make_pauli_term(2, {1: "z", 2: "z"})
    zsum = make_pauli_term(2, {1: "z"}) + make_pauli_term(2, {2: "z"})
    a1 = ((1 + p) * eye + (p - 1) * zz) / 2
    a2 = (1 - p * p) / (2 * np.sqrt(2)) * (eye + zz)
    a3 = np.sqrt((1 - p**4) / 8) * zsum
    return KrausSet(2, (a1, a2, a3))


def apply_kraus(rho, ks: KrausSet) -> np.ndarray:
    rho = _check_rho(rho, ks.n_spins)
    out = np.zeros_like(rho, dtype=complex)
    for k in ks.ops:
        out += k @ rho @ k.conj().T
    return out


def kraus_damping(ks: KrausSet) -> np.ndarray:
    """Damping matrix ``sum_m k_m k_m^dagger`` of a set of diagonal Kraus operators."""
    m = 2**ks.n_spins
    out = np.zeros((m, m), dtype=complex)
    for k in ks.ops:
        d = np.diag(k)
        out += np.outer(d, d.conj())
    return out


# ---------------------------------------------------------- extended Kraus forms

def extended_kraus_from_damping(w) -> ExtendedKrausCoeffs:
    w = np.asarray(w, dtype=complex)
    n = n_spins_of(w)
    wh = walsh_hadamard(n)
    return ExtendedKrausCoeffs(n, wh @ w @ wh / 4**n)


def extended_two_spin(rates: CorrelatedRates, t: float) -> ExtendedKrausCoeffs:
    """Closed-form extended Kraus coefficients of the correlated two-spin channel.

    With ``p1 = e^{-R1 t}``, ``p2 = e^{-R2 t}``, ``q = e^{-S t}``:
    ``8 c`` has ``a = p1 p2 (1 - q²) / q`` on the ``(Z1, Z2)`` cross terms,
    ``-a`` on the ``(I, Z1 Z2)`` cross terms and
    ``b(e1, e2, e3) = 2 (1 + e1 p1)(1 + e2 p2) + e3 p1 p2 (q - 1)² / q``
    on the diagonal.
    """
    rates.validate()
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    p1, p2, q = np.exp(-rates.R1 * t), np.exp(-rates.R2 * t), np.exp(-rates.S * t)
    a = p1 * p2 * (1 - q * q) / q

    def b(e1, e2, e3):
        return 2 * (1 + e1 * p1) * (1 + e2 * p2) + e3 * p1 * p2 * (q - 1) ** 2 / q

    # index: 0 = I, 1 = Z2, 2 = Z1, 3 = Z1 Z2
    c = np.zeros((4, 4))
    c[0, 0] = b(1, 1, 1)
    c[2, 2] = b(-1, 1, -1)
    c[1, 1] = b(1, -1, -1)
    c[3, 3] = b(-1, -1, 1)
    c[1, 2] = c[2, 1] = a
    c[0, 3] = c[3, 0] = -a
    return ExtendedKrausCoeffs(2, c / 8)


def apply_extended(rho, coeffs: ExtendedKrausCoeffs) -> np.ndarray:
    """Literal double sum ``sum_{m,m'} c[m, m'] Z_m rho Z_m'``."""
    rho = _check_rho(rho, coeffs.n_spins)
    zdiag = walsh_hadamard(coeffs.n_spins)
    out = np.zeros_like(rho, dtype=complex)
    c = coeffs.c
    for m in range(c.shape[0]):
        left = zdiag[:, m][:, None] * rho
        for mp in range(c.shape[1]):
            if abs(c[m, mp]) > 1e-300:
                out += c[m, mp] * left * zdiag[:, mp][None, :]
    return out


__all__ = [
    "NonPSDError", "LindbladSet", "KrausSet", "ExtendedKrausCoeffs", "CorrelatedRates",
    "lindblad_from_generator", "independent_lindblads", "correlated_sign_pattern",
    "correlated_coefficients", "correlated_two_spin_lindblads", "lindblads_for_correlated_damping",
    "lindblad_rates", "lindblad_rhs", "superoperator_matrix", "evolve_lindblad",
    "dense_lindbladian", "evolve_dense", "kraus_from_damping", "independent_kraus",
    "collective_two_spin_kraus", "apply_kraus", "kraus_damping", "extended_kraus_from_damping",
    "extended_two_spin", "apply_extended",
]
