"""Gradient propagators, phase-damping matrices and rate matrices.

A gradient sequence is summarised by a real *generator* vector ``lam`` of
length ``M = 2**N`` such that the net propagator is
``G(z) = exp(-i z Diag(lam))``. A diffusion period of length ``t`` with
diffusion constant ``D`` then multiplies each density-matrix entry by
``exp(-(lam[m] - lam[m'])**2 * D * t)``. For a collective pulse of wave number
``k`` this is ``lam[m] = k (N - 2 h(m)) / 2`` with ``h`` the Hamming weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.linalg import expm

from .popcore import ATOL, make_pauli_term, n_spins_of


@dataclass(frozen=True)
class GradientPulse:
    """Gradient pulse with per-spin wave numbers ``k^n`` in rad/m."""

    wavenumbers: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "wavenumbers", tuple(float(k) for k in self.wavenumbers))


@dataclass(frozen=True)
class Gate:
    """Conditional logic gate: ``cnot`` (one control) or ``toffoli`` (two)."""

    kind: str
    target: int
    controls: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        expected = {"cnot": 1, "toffoli": 2}.get(self.kind)
        if expected is None:
            raise ValueError(f"unknown gate {self.kind!r}")
        if len(self.controls) != expected:
            raise ValueError(f"{self.kind} needs {expected} control spin(s), got {len(self.controls)}")
        if self.target in self.controls or len(set(self.controls)) != len(self.controls):
            raise ValueError(f"{self.kind}: target and controls must be distinct spins")

    def matrix(self, n_spins: int) -> np.ndarray:
        # I - P + sigma_x^target P with P the projector onto all controls = 1
        proj = make_pauli_term(n_spins, {c: "e1" for c in self.controls})
        flip = make_pauli_term(n_spins, {self.target: "x", **{c: "e1" for c in self.controls}})
        return np.eye(2**n_spins, dtype=complex) - proj + flip

    def spins(self) -> tuple[int, ...]:
        return (self.target, *self.controls)


def cnot(target: int, control: int) -> Gate:
    return Gate("cnot", target, (control,))


def toffoli(target: int, control1: int, control2: int) -> Gate:
    return Gate("toffoli", target, (control1, control2))


@dataclass(frozen=True)
class ConditionalSandwich:
    """``gate``, then the ``inner`` pulse, then ``gate`` again."""

    gate: Gate
    inner: GradientPulse


@dataclass(frozen=True)
class Rotation:
    """RF rotation ``exp(-i angle sigma_axis / 2)`` on each listed spin."""

    axis: str
    angle: float
    spins: tuple[int, ...]

    def __post_init__(self):
        if self.axis not in ("x", "y", "z"):
            raise ValueError(f"rotation axis must be x, y or z, got {self.axis!r}")
        object.__setattr__(self, "spins", tuple(int(s) for s in self.spins))

    def matrix(self, n_spins: int) -> np.ndarray:
        u = np.eye(2**n_spins, dtype=complex)
        for s in self.spins:
            u = expm(-0.5j * self.angle * make_pauli_term(n_spins, {s: self.axis})) @ u
        return u


@dataclass(frozen=True)
class Diffusion:
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError(f"diffusion duration must be >= 0, got {self.duration}")


GradientEvent = Union[GradientPulse, ConditionalSandwich, Rotation, Diffusion]


class NotDiagonalError(ValueError):
    """The composed gradient propagator is not diagonal in the computational basis."""


def _pulse_phases(pulse: GradientPulse, n_spins: int) -> np.ndarray:
    if len(pulse.wavenumbers) != n_spins:
        raise ValueError(f"pulse has {len(pulse.wavenumbers)} wave numbers for {n_spins} spins")
    phases = np.zeros(2**n_spins)
    for n, k in enumerate(pulse.wavenumbers, start=1):
        if k:
            phases += k * np.real(np.diag(make_pauli_term(n_spins, {n: "z"}))) / 2
    return phases


def _check_spins(spins, n_spins):
    for s in spins:
        if not 1 <= s <= n_spins:
            raise ValueError(f"spin index {s} out of range 1..{n_spins}")


class _Frame:
    """Net propagator kept as ``P exp(-i z Diag(lam))`` with ``P`` z-independent."""

    def __init__(self, n_spins: int):
        self.n_spins = n_spins
        self.frame = np.eye(2**n_spins, dtype=complex)
        self.lam = np.zeros(2**n_spins)
        self.count = 0

    def pulse(self, pulse: GradientPulse):
        phases = _pulse_phases(pulse, self.n_spins)
        # exp(-iz Phi) P = P exp(-iz P^dag Phi P); P^dag Phi P must stay diagonal
        conj = self.frame.conj().T @ np.diag(phases) @ self.frame
        off = np.abs(conj - np.diag(np.diag(conj))).max()
        if off > 1e-9:
            raise NotDiagonalError(
                f"event {self.count}: gradient pulse is not diagonal in the current RF frame "
                f"(off-diagonal magnitude {off:.3g}); the net propagator cannot be written "
                "as a diagonal generator"
            )
        self.lam = self.lam + np.real(np.diag(conj))

    def unitary(self, u: np.ndarray):
        self.frame = u @ self.frame

    def apply(self, event):
        if isinstance(event, GradientPulse):
            self.pulse(event)
        elif isinstance(event, ConditionalSandwich):
            _check_spins(event.gate.spins(), self.n_spins)
            g = event.gate.matrix(self.n_spins)
            self.unitary(g)
            self.pulse(event.inner)
            self.unitary(g)
        elif isinstance(event, Rotation):
            _check_spins(event.spins, self.n_spins)
            self.unitary(event.matrix(self.n_spins))
        else:
            raise TypeError(f"unsupported gradient event {event!r}")
        self.count += 1

    def require_diagonal(self, where: str):
        f = self.frame
        off = np.abs(f - np.diag(np.diag(f))).max()
        if off > 1e-9:
            raise NotDiagonalError(
                f"net propagator is not diagonal {where} (RF frame off-diagonal magnitude {off:.3g})"
            )


def gradient_generator(n_spins: int, events: Sequence[GradientEvent]) -> np.ndarray:
    """Diagonal generator ``lam`` of the net propagator of a gradient sequence.

    Events are in temporal order. Gates and rotations are tracked as a
    z-independent frame ``P``; each later pulse is conjugated into that frame,
    which must leave it diagonal. The frame itself must be diagonal at the end.

    Raises:
        NotDiagonalError: if the sequence does not reduce to a diagonal propagator.
    """
    fr = _Frame(n_spins)
    for ev in events:
        if isinstance(ev, Diffusion):
            raise TypeError("diffusion periods are not part of a gradient generator; use sequence_damping")
        fr.apply(ev)
    fr.require_diagonal("at the end of the sequence")
    return fr.lam


def collective_generator(n_spins: int, k: float) -> np.ndarray:
    return gradient_generator(n_spins, [GradientPulse([k] * n_spins)])


def _check_nonneg(**kw):
    for name, v in kw.items():
        if v < 0:
            raise ValueError(f"{name} must be >= 0, got {v}")


def rate_matrix(gen, D: float) -> np.ndarray:
    """Entrywise decay rates ``r[m, m'] = (lam[m] - lam[m'])**2 * D`` (1/s)."""
    _check_nonneg(D=D)
    lam = np.asarray(gen, dtype=float)
    return (lam[:, None] - lam[None, :]) ** 2 * D


def rates_from_lindblad_diagonal(ell) -> np.ndarray:
    """Rate matrix ``1/2 (1 (l.l)^T + (l.l) 1^T) - l l^T`` of a diagonal Lindblad vector."""
    ell = np.asarray(ell, dtype=float)
    sq = ell * ell
    ones = np.ones_like(ell)
    return 0.5 * (np.outer(ones, sq) + np.outer(sq, ones)) - np.outer(ell, ell)


def damping_from_rates(r, t: float) -> np.ndarray:
    _check_nonneg(t=t)
    return np.exp(-np.asarray(r) * t)


def damping_matrix(gen, D: float, t: float) -> np.ndarray:
    """Phase-damping matrix after diffusion for time ``t`` under generator ``gen``."""
    _check_nonneg(D=D, t=t)
    return damping_from_rates(rate_matrix(gen, D), t)


def apply_damping(rho, w) -> np.ndarray:
    rho, w = np.asarray(rho), np.asarray(w)
    if rho.shape != w.shape:
        raise ValueError(f"dimension mismatch: rho{rho.shape} vs w{w.shape}")
    return w * rho


def independent_damping(survival) -> np.ndarray:
    """Damping matrix with entries ``prod_n p_n ** [bit n of m differs from m']``.

    ``survival[n-1]`` is the single-spin coherence factor of spin ``n``.
    """
    p = [float(x) for x in survival]
    out = np.ones((1, 1))
    for pn in p:
        out = np.kron(out, np.array([[1.0, pn], [pn, 1.0]]))
    return out


def correlated_damping(R1: float, R2: float, S: float, t: float) -> np.ndarray:
    """Two-spin Hadamard multiplier for correlated dephasing.

    ``I + e^{-R1 t} sx1 + e^{-R2 t} sx2 + e^{-(R1+R2) t} exp(-S sz1 sz2 t) sx1 sx2``
    (the identity here is the 4x4 identity, so the diagonal is 1). Single-spin
    coherences of spin ``n`` decay as ``e^{-Rn t}``; double- and zero-quantum
    coherences as ``e^{-(R1+R2+S) t}`` and ``e^{-(R1+R2-S) t}``.
    """
    _check_nonneg(R1=R1, R2=R2, t=t)
    bound = np.sqrt(R1 * R2)
    if abs(S) > bound * (1 + 1e-12) + 1e-15:
        raise ValueError(f"correlation S={S} outside the admissible range [-{bound}, {bound}]")
    x1 = make_pauli_term(2, {1: "x"}).real
    x2 = make_pauli_term(2, {2: "x"}).real
    zz = np.array([1.0, -1.0, -1.0, 1.0])
    both = (np.exp(-(R1 + R2 + S * zz) * t)[:, None]) * (x1 @ x2)
    return np.eye(4) + np.exp(-R1 * t) * x1 + np.exp(-R2 * t) * x2 + both


def sequence_state(n_spins: int, events: Sequence[GradientEvent], D: float) -> tuple[np.ndarray, np.ndarray]:
    """Accumulated damping and the generator left standing after ``events``.

    Each ``Diffusion`` damps with the generator accumulated so far. The RF frame
    must be diagonal at every diffusion period and at the end.
    """
    _check_nonneg(D=D)
    fr = _Frame(n_spins)
    w = np.ones((2**n_spins, 2**n_spins))
    for ev in events:
        if isinstance(ev, Diffusion):
            fr.require_diagonal(f"at diffusion period (event {fr.count})")
            w = w * damping_matrix(fr.lam, D, ev.duration)
            fr.count += 1
        else:
            fr.apply(ev)
    fr.require_diagonal("at the end of the sequence")
    return w, fr.lam


def sequence_damping(n_spins: int, events: Sequence[GradientEvent], D: float) -> np.ndarray:
    """Damping matrix of a gradient sequence containing diffusion periods."""
    return sequence_state(n_spins, events, D)[0]


def check_damping(w, tol: float = ATOL) -> None:
    """Raise ``ValueError`` unless ``w`` is Hermitian, unit-diagonal and PSD."""
    w = np.asarray(w)
    n_spins_of(w)
    if np.abs(w - w.conj().T).max() > tol:
        raise ValueError("damping matrix is not Hermitian")
    if np.abs(np.diag(w) - 1).max() > tol:
        raise ValueError("damping matrix diagonal is not 1")
    lo = np.linalg.eigvalsh((w + w.conj().T) / 2).min()
    if lo < -tol:
        raise ValueError(f"damping matrix is not positive-semidefinite (min eigenvalue {lo:.3g})")


__all__ = [
    "GradientPulse", "Gate", "cnot", "toffoli", "ConditionalSandwich", "Rotation", "Diffusion",
    "GradientEvent", "NotDiagonalError", "gradient_generator", "collective_generator",
    "rate_matrix", "rates_from_lindblad_diagonal", "damping_from_rates", "damping_matrix",
    "apply_damping", "independent_damping", "correlated_damping", "sequence_state", "sequence_damping",
    "check_damping",
]
