import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from declab.gradflow import apply_damping, collective_generator, correlated_damping, damping_matrix
from declab.models import (
    T1Spec,
    axis_rotation,
    decohere_about_axis,
    evolve_correlated,
    isotropic_collective,
    isotropic_lindblad_ops,
    t1_damping,
    t1_relax,
    z_quarter_turn,
    zz_projections,
)
from declab.popcore import SIGMA, hadamard_transform_op, make_pauli_term, pauli_string
from declab.reps import CorrelatedRates, evolve_dense


def ginibre(rng, m):
    g = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def test_zz_projections_examples():
    parts = zz_projections(pauli_string("x1"))
    assert np.array_equal(parts.mp, pauli_string("x1"))
    assert not parts.pp.any() and not parts.pm.any() and not parts.mm.any()
    parts = zz_projections(np.eye(4))
    assert np.array_equal(parts.pp, np.eye(4))
    assert np.array_equal(parts[1, 1], parts.pp)
    with pytest.raises(ValueError):
        zz_projections(np.eye(2))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_zz_projections_partition(seed):
    rho = ginibre(np.random.default_rng(seed), 4)
    parts = zz_projections(rho)
    assert np.abs(parts.total() - rho).max() < 1e-13
    z1, z2 = pauli_string("z1"), pauli_string("1z")
    for e1, e2 in itertools.product((1, -1), repeat=2):
        comp = parts[e1, e2]
        assert np.abs(z1 @ comp @ z1 - e1 * comp).max() < 1e-13
        assert np.abs(z2 @ comp @ z2 - e2 * comp).max() < 1e-13
        assert np.abs(zz_projections(comp)[e1, e2] - comp).max() < 1e-13


def test_evolve_correlated_cosh_sinh():
    # evolution only; the rates need not describe an admissible damping matrix
    out = evolve_correlated(pauli_string("xx"), CorrelatedRates(0, 0, 1), 1.0)
    expected = np.cosh(1) * pauli_string("xx") + np.sinh(1) * pauli_string("yy")
    assert np.abs(out - expected).max() < 1e-14
    assert np.abs(expm(-pauli_string("zz")) @ pauli_string("xx") - expected).max() < 1e-14


def test_evolve_correlated_examples():
    d = np.diag([0.1, 0.2, 0.3, 0.4])
    assert np.abs(evolve_correlated(d, CorrelatedRates(1, 2, 0.5), 0.7) - d).max() < 1e-16
    rho = ginibre(np.random.default_rng(1), 4)
    w = correlated_damping(1, 2, 0.5, 0.3)
    assert np.abs(evolve_correlated(rho, CorrelatedRates(1, 2, 0.5), 0.3) - w * rho).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 3), st.floats(0, 3), st.floats(-1, 1), st.floats(0, 3))
def test_evolve_correlated_equals_hadamard_route_on_units(r1, r2, frac, t):
    s = frac * np.sqrt(r1 * r2)
    rates = CorrelatedRates(r1, r2, s)
    w = correlated_damping(r1, r2, s, t)
    for i, j in itertools.product(range(4), repeat=2):
        e = np.zeros((4, 4), dtype=complex)
        e[i, j] = 1
        assert np.abs(evolve_correlated(e, rates, t) - apply_damping(e, w)).max() < 1e-12


def test_axis_rotation_maps_axis_to_z():
    for n in (1, 2):
        for axis in "xyz":
            u = axis_rotation(n, axis)
            for s in range(1, n + 1):
                sigma = make_pauli_term(n, {s: axis})
                assert np.abs(u @ sigma @ u.conj().T - make_pauli_term(n, {s: "z"})).max() < 1e-14
    with pytest.raises(ValueError):
        axis_rotation(1, "w")


def test_z_quarter_turn():
    z = z_quarter_turn(1)
    assert np.abs(z @ SIGMA["x"] @ z.conj().T - SIGMA["y"]).max() < 1e-15


def test_decohere_about_axis_examples():
    p = 0.3
    w = np.array([[1, p], [p, 1]])
    assert np.abs(decohere_about_axis(SIGMA["z"], w, "x") - p * SIGMA["z"]).max() < 1e-15
    assert np.abs(decohere_about_axis(SIGMA["x"], w, "x") - SIGMA["x"]).max() < 1e-15
    rho = ginibre(np.random.default_rng(2), 2)
    assert np.array_equal(decohere_about_axis(rho, w, "z"), apply_damping(rho, w))
    assert np.abs(decohere_about_axis(rho, w, hadamard_transform_op(1)) - decohere_about_axis(rho, w, "x")).max() < 1e-15
    with pytest.raises(ValueError):
        decohere_about_axis(rho, w, 2 * np.eye(2))
    with pytest.raises(ValueError):
        decohere_about_axis(rho, w, np.eye(4))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_decohere_about_axis_random_unitary(n, seed):
    rng = np.random.default_rng(seed)
    m = 2**n
    q, _ = np.linalg.qr(rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
    rho = ginibre(rng, m)
    w = damping_matrix(rng.normal(size=m), 1.0, 0.5)
    out = decohere_about_axis(rho, w, q)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.abs(out - out.conj().T).max() < 1e-12


def test_isotropic_single_spin_is_symmetric():
    k, D, t = 1.0, 1.0, 0.4
    p = np.exp(-k * k * D * t)
    for label in "xyz":
        out = isotropic_collective(SIGMA[label], k, D, t)
        assert np.abs(out - p * p * SIGMA[label]).max() < 1e-14
    rho = ginibre(np.random.default_rng(3), 2)
    assert np.abs(isotropic_collective(rho, k, D, 0.0) - rho).max() < 1e-15
    assert np.abs(isotropic_collective(np.eye(2) / 2, k, D, t) - np.eye(2) / 2).max() < 1e-15


def test_isotropic_matches_sequential_lindblad_evolution():
    k, D, t = 0.8, 1.3, 0.6
    for n in (1, 2):
        ops = isotropic_lindblad_ops(n, k, D)
        rho = ginibre(np.random.default_rng(n), 2**n)
        seq = rho
        for op in ops:
            seq = evolve_dense(seq, [op], t)
        assert np.abs(isotropic_collective(rho, k, D, t) - seq).max() < 1e-12


def test_isotropic_lindblad_ops_single_spin():
    ops = isotropic_lindblad_ops(1, 2.0, 0.5)
    for op, label in zip(ops, "zxy"):
        assert np.abs(op - SIGMA[label]).max() < 1e-15


def test_t1_examples():
    spec = T1Spec([1.0], np.eye(2) / 2)
    rho = (np.eye(2) + SIGMA["z"]) / 2
    out = t1_relax(rho, spec, 1.0)
    assert np.abs(out - (np.eye(2) / 2 + np.exp(-1) / 2 * SIGMA["z"])).max() < 1e-15
    for t in (0.0, 0.3, 7.0):
        assert np.abs(t1_relax(spec.rho_eq, spec, t) - spec.rho_eq).max() < 1e-15


def test_t1_long_time_limit_and_coherences():
    rng = np.random.default_rng(4)
    eq = np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)
    spec = T1Spec([1.0, 2.5], eq)
    rho = ginibre(rng, 4)
    out = t1_relax(rho, spec, 50 * 2.5)
    assert np.abs(np.diag(out) - np.diag(eq)).max() < 1e-10
    off = ~np.eye(4, dtype=bool)
    assert np.array_equal(out[off], rho[off])
    for t in (0.1, 1.0, 3.0):
        assert abs(np.trace(t1_relax(rho, spec, t)) - 1) < 1e-14


def test_t1_two_spin_zz_order_decays():
    spec = T1Spec([1.0, 1.0], np.eye(4) / 4)
    rho = (np.eye(4) + pauli_string("zz")) / 4
    out = t1_relax(rho, spec, 1.0)
    # each spin flips independently: the zz order decays at the sum of both rates
    assert np.abs(out - (np.eye(4) + np.exp(-2) * pauli_string("zz")) / 4).max() < 1e-15
    rho = (np.eye(4) + pauli_string("z1")) / 4
    assert np.abs(t1_relax(rho, spec, 1.0) - (np.eye(4) + np.exp(-1) * pauli_string("z1")) / 4).max() < 1e-15


def test_t1_damping_matches_single_spin_exponent():
    w = t1_damping([2.0], 1.0)
    assert abs(w[0, 1] - np.exp(-0.5)) < 1e-16


def test_t1_spec_validation():
    with pytest.raises(ValueError):
        T1Spec([0.0], np.eye(2) / 2)
    with pytest.raises(ValueError):
        T1Spec([1.0, 1.0], np.eye(2) / 2)
    with pytest.raises(ValueError):
        T1Spec([1.0], np.eye(2))
    with pytest.raises(ValueError):
        T1Spec([1.0], np.array([[0.5, 1], [0, 0.5]]))
    spec = T1Spec([1.0], np.eye(2) / 2)
    with pytest.raises(ValueError):
        t1_relax(np.eye(4) / 4, spec, 1.0)
    with pytest.raises(ValueError):
        t1_relax(np.eye(2) / 2, spec, -1.0)


def test_collective_axis_matches_dense_rotated_lindblad():
    n, k, D, t = 2, 1.0, 0.7, 0.9
    w = damping_matrix(collective_generator(n, k), D, t)
    u = axis_rotation(n, "y")
    op = isotropic_lindblad_ops(n, k, D)[2]
    rho = ginibre(np.random.default_rng(5), 4)
    assert np.abs(decohere_about_axis(rho, w, "y") - evolve_dense(rho, [op], t)).max() < 1e-12
    assert np.abs(u.conj().T @ make_pauli_term(n, {1: "z"}) @ u - make_pauli_term(n, {1: "y"})).max() < 1e-14
