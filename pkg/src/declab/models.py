"""Composite decoherence models built from damping matrices.

Covers the two-spin projections onto parallel/perpendicular z-components,
correlated two-spin evolution without Hadamard products, decoherence about a
rotated axis, isotropic collective decoherence and T1 relaxation toward an
equilibrium state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gradflow import (
    apply_damping,
    collective_generator,
    damping_matrix,
    independent_damping,
)
from .popcore import ATOL, hadamard_transform_op, make_pauli_term, n_spins_of
from .reps import CorrelatedRates


@dataclass(frozen=True, eq=False)
class ZZProjections:
    """``rho_{e1 e2}``: components even (+) or odd (-) under ``sigma_z^n`` conjugation."""

    pp: np.ndarray
    mp: np.ndarray
    pm: np.ndarray
    mm: np.ndarray

    def total(self) -> np.ndarray:
        return self.pp + self.mp + self.pm + self.mm

    def __getitem__(self, signs: tuple[int, int]) -> np.ndarray:
        key = {(1, 1): "pp", (-1, 1): "mp", (1, -1): "pm", (-1, -1): "mm"}[tuple(signs)]
        return getattr(self, key)


@dataclass(frozen=True, eq=False)
class T1Spec:
    """Per-spin relaxation times (s) and the equilibrium density matrix."""

    t1: tuple[float, ...]
    rho_eq: np.ndarray

    def __post_init__(self):
        t1 = tuple(float(x) for x in self.t1)
        if any(x <= 0 for x in t1):
            raise ValueError(f"T1 times must be > 0, got {t1}")
        rho_eq = np.asarray(self.rho_eq, dtype=complex)
        if n_spins_of(rho_eq) != len(t1):
            raise ValueError(f"{len(t1)} T1 times for a {n_spins_of(rho_eq)}-spin equilibrium state")
        if np.abs(rho_eq - rho_eq.conj().T).max() > ATOL:
            raise ValueError("equilibrium state must be Hermitian")
        if abs(np.trace(rho_eq) - 1) > ATOL:
            raise ValueError("equilibrium state must have unit trace")
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "rho_eq", rho_eq)


def _two_spins(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if n_spins_of(rho) != 2:
        raise ValueError(f"expected a two-spin operator, got shape {rho.shape}")
    return rho


def zz_projections(rho) -> ZZProjections:
    rho = _two_spins(rho)
    z1 = np.diag(make_pauli_term(2, {1: "z"}))
    z2 = np.diag(make_pauli_term(2, {2: "z"}))
    # sigma_z^n rho sigma_z^n is an entrywise sign flip
    c1 = np.outer(z1, z1) * rho
    c2 = np.outer(z2, z2) * rho
    c12 = np.outer(z1 * z2, z1 * z2) * rho

    def proj(e1, e2):
        return (rho + e1 * c1 + e2 * c2 + e1 * e2 * c12) / 4

    return ZZProjections(proj(1, 1), proj(-1, 1), proj(1, -1), proj(-1, -1))


def evolve_correlated(rho, rates: CorrelatedRates, t: float) -> np.ndarray:
    """``rho++ + e^{-R1 t} rho-+ + e^{-R2 t} rho+- + e^{-(R1+R2) t} exp(-S Z1Z2 t) rho--``."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    parts = zz_projections(rho)
    zz = np.array([1.0, -1.0, -1.0, 1.0])
    left = np.diag(np.exp(-rates.S * zz * t))
    return (parts.pp
            + np.exp(-rates.R1 * t) * parts.mp
            + np.exp(-rates.R2 * t) * parts.pm
            + np.exp(-(rates.R1 + rates.R2) * t) * (left @ parts.mm))


def axis_rotation(n_spins: int, axis: str) -> np.ndarray:
    """Unitary ``U`` with ``U sigma_axis U^dagger = sigma_z`` on every spin."""
    if axis == "z":
        return np.eye(2**n_spins, dtype=complex)
    h = hadamard_transform_op(n_spins)
    if axis == "x":
        return h
    if axis == "y":
        z = z_quarter_turn(n_spins)
        return z @ h @ z.conj().T
    raise ValueError(f"axis must be x, y or z, got {axis!r}")


def z_quarter_turn(n_spins: int) -> np.ndarray:
    """``exp(-i pi (sigma_z^1 + ... + sigma_z^N) / 4)``."""
    total = sum(np.real(np.diag(make_pauli_term(n_spins, {n: "z"}))) for n in range(1, n_spins + 1))
    return np.diag(np.exp(-1j * np.pi * total / 4))


def decohere_about_axis(rho, w, axis="z") -> np.ndarray:
    """``U^dagger (w (.) (U rho U^dagger)) U`` for an axis name or explicit rotation ``U``."""
    rho = np.asarray(rho, dtype=complex)
    n = n_spins_of(rho)
    if isinstance(axis, str):
        if axis == "z":
            return apply_damping(rho, w)
        u = axis_rotation(n, axis)
    else:
        u = np.asarray(axis, dtype=complex)
        if u.shape != rho.shape:
            raise ValueError(f"dimension mismatch: rotation{u.shape} vs rho{rho.shape}")
        if np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() > ATOL:
            raise ValueError("rotation is not unitary")
    return u.conj().T @ apply_damping(u @ rho @ u.conj().T, w) @ u


def isotropic_collective(rho, k: float, D: float, t: float) -> np.ndarray:
    """Collective decoherence about z, then x, then y, each for a period ``t``."""
    rho = np.asarray(rho, dtype=complex)
    n = n_spins_of(rho)
    w = damping_matrix(collective_generator(n, k), D, t)
    out = decohere_about_axis(rho, w, "z")
    out = decohere_about_axis(out, w, "x")
    return decohere_about_axis(out, w, "y")


def isotropic_lindblad_ops(n_spins: int, k: float, D: float) -> list[np.ndarray]:
    """``k sqrt(D/2) sum_n sigma_mu^n`` for ``mu`` in ``z, x, y``."""
    return [
        k * np.sqrt(D / 2) * sum(make_pauli_term(n_spins, {n: mu}) for n in range(1, n_spins + 1))
        for mu in ("z", "x", "y")
    ]


def t1_damping(t1: Sequence[float], t: float) -> np.ndarray:
    """Independent damping with per-spin factors ``exp(-t / T1^n)``."""
    return independent_damping([np.exp(-t / x) for x in t1])


def t1_relax(rho, spec: T1Spec, t: float) -> np.ndarray:
    """Relax the diagonal of ``rho`` toward ``diag(rho_eq)``; coherences pass through.

    The diagonal deviation is decohered about the x-axis:
    ``H (D(t) (.) (H Diag(diag(rho - rho_eq)) H)) H + Diag(diag(rho_eq))``.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != spec.rho_eq.shape:
        raise ValueError(f"dimension mismatch: rho{rho.shape} vs rho_eq{spec.rho_eq.shape}")
    n = n_spins_of(rho)
    h = hadamard_transform_op(n)
    dev = np.diag(np.diag(rho - spec.rho_eq))
    relaxed = h @ apply_damping(h @ dev @ h, t1_damping(spec.t1, t)) @ h
    off = rho - np.diag(np.diag(rho))
    return np.diag(np.diag(relaxed + spec.rho_eq)) + off
