import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from declab.popcore import (
    ATOL,
    SIGMA,
    PauliExpansion,
    allclose,
    diag_sigma_z_coeffs,
    diagonal_sandwich,
    dyad_product_form,
    hadamard_product,
    hadamard_transform_op,
    is_diagonal,
    kron,
    make_pauli_term,
    n_spins_of,
    pauli_expand,
    pauli_hadamard_table,
    pauli_string,
    pauli_synth,
    walsh_hadamard,
    z_string,
)


def rand_c(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_make_pauli_term_examples():
    assert np.array_equal(make_pauli_term(2, {1: "z"}), np.diag([1, 1, -1, -1]))
    assert np.array_equal(make_pauli_term(1, {1: "e0"}), [[1, 0], [0, 0]])
    e01 = make_pauli_term(2, {1: "e0", 2: "e1"})
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    assert np.array_equal(e01, expected)


def test_make_pauli_term_accepts_pairs():
    assert np.array_equal(make_pauli_term(2, [(2, "x")]), np.kron(SIGMA["1"], SIGMA["x"]))


@pytest.mark.parametrize("factors", [{0: "x"}, {3: "z"}, [(1, "x"), (1, "z")], {1: "q"}])
def test_make_pauli_term_rejects(factors):
    with pytest.raises(ValueError):
        make_pauli_term(2, factors)


def test_spin_cap_at_least_six():
    assert make_pauli_term(6, {6: "z"}).shape == (64, 64)
    with pytest.raises(ValueError):
        make_pauli_term(0, {})


def test_pauli_string_order():
    # first letter is spin 1, the leftmost Kronecker factor
    assert np.array_equal(pauli_string("z1"), np.kron(SIGMA["z"], SIGMA["1"]))
    assert np.array_equal(pauli_string("xy"), np.kron(SIGMA["x"], SIGMA["y"]))
    with pytest.raises(ValueError):
        pauli_string("xa")


def test_hadamard_product_examples():
    assert np.array_equal(hadamard_product(SIGMA["x"], SIGMA["y"]), SIGMA["y"])
    assert np.array_equal(hadamard_product(SIGMA["y"], SIGMA["y"]), -SIGMA["x"])
    a = rand_c(np.random.default_rng(1), 4, 4)
    assert np.array_equal(hadamard_product(np.eye(4), a), np.diag(np.diag(a)))
    assert np.array_equal(hadamard_product(a, SIGMA["x"].repeat(2, 0).repeat(2, 1)),
                          hadamard_product(SIGMA["x"].repeat(2, 0).repeat(2, 1), a))
    with pytest.raises(ValueError):
        hadamard_product(np.eye(2), np.eye(4))


def test_pauli_table_entries():
    table = pauli_hadamard_table()
    assert table["1", "1"] == "1" and table["z", "z"] == "1"
    assert table["1", "z"] == table["z", "1"] == "z"
    assert table["x", "x"] == "x" and table["y", "y"] == "-x"
    assert table["x", "y"] == table["y", "x"] == "y"
    zeros = {("1", "x"), ("1", "y"), ("x", "1"), ("y", "1"), ("x", "z"), ("z", "x"), ("y", "z"), ("z", "y")}
    assert {k for k, v in table.items() if v == "0"} == zeros


def test_kron_examples():
    assert np.array_equal(kron(SIGMA["1"], SIGMA["1"]), np.eye(4))
    assert np.array_equal(kron(SIGMA["z"], SIGMA["1"]), np.diag([1, 1, -1, -1]))


def test_mixed_product_identity():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a, b, c, d = (rand_c(rng, 2, 2) for _ in range(4))
        lhs = hadamard_product(kron(a, b), kron(c, d))
        rhs = kron(hadamard_product(a, c), hadamard_product(b, d))
        assert np.abs(lhs - rhs).max() < 1e-12


def test_pauli_expand_examples():
    c = pauli_expand(make_pauli_term(2, {1: "z"}))
    assert c["z1"] == 1
    assert all(v == 0 for w, v in c.coeffs.items() if w != "z1")
    assert len(c.coeffs) == 16
    e0 = pauli_expand(make_pauli_term(1, {1: "e0"})).nonzero()
    assert e0 == {"1": 0.5, "z": 0.5}


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_pauli_round_trip(n, seed):
    a = rand_c(np.random.default_rng(seed), 2**n, 2**n)
    back = pauli_synth(pauli_expand(a))
    assert np.abs(back - a).max() < 1e-13


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_hermitian_has_real_coefficients(n, seed):
    a = rand_c(np.random.default_rng(seed), 2**n, 2**n)
    h = a + a.conj().T
    assert max(abs(c.imag) for c in pauli_expand(h).coeffs.values()) < 1e-13


def test_pauli_synth_skips_zeros():
    exp = PauliExpansion(1, {"1": 0, "x": 2.0, "y": 0, "z": 0})
    assert np.array_equal(pauli_synth(exp), 2 * SIGMA["x"])


def test_walsh_hadamard_columns_are_z_strings():
    wh = walsh_hadamard(2)
    assert np.array_equal(np.diag(wh[:, 1]), pauli_string("1z"))
    assert np.array_equal(np.diag(wh[:, 2]), pauli_string("z1"))
    assert np.array_equal(z_string(2, 3), pauli_string("zz"))
    wh3 = walsh_hadamard(3)
    for i in range(8):
        for j in range(8):
            assert wh3[i, j] == (-1) ** bin(i & j).count("1")


def test_diag_sigma_z_coeffs_examples():
    assert np.allclose(diag_sigma_z_coeffs(np.array([1.0, 0.0])), [0.5, 0.5], atol=0)
    assert np.allclose(diag_sigma_z_coeffs(np.array([1.0, 1.0])), [1.0, 0.0], atol=0)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_diag_sigma_z_coeffs_match_expansion(n, seed):
    d = rand_c(np.random.default_rng(seed), 2**n)
    dp = diag_sigma_z_coeffs(d)
    coeffs = pauli_expand(np.diag(d)).coeffs
    for m in range(2**n):
        word = "".join("z" if (m >> (n - 1 - s)) & 1 else "1" for s in range(n))
        assert abs(coeffs[word] - dp[m]) < 1e-13
    rebuilt = sum(dp[m] * z_string(n, m) for m in range(2**n))
    assert np.abs(rebuilt - np.diag(d)).max() < 1e-13


def test_diagonal_sandwich_examples():
    out = diagonal_sandwich(np.array([1, -1]), SIGMA["x"], np.array([1, 1]))
    assert np.array_equal(out, [[0, 1], [-1, 0]])
    assert np.array_equal(out, SIGMA["z"] @ SIGMA["x"])
    b = rand_c(np.random.default_rng(3), 2, 2)
    assert np.array_equal(diagonal_sandwich(np.ones(2), b, np.ones(2)), b)
    with pytest.raises(ValueError):
        diagonal_sandwich(np.ones(2), np.eye(4), np.ones(2))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_diagonal_sandwich_matches_triple_product(n, seed):
    rng = np.random.default_rng(seed)
    m = 2**n
    a, c, b = rand_c(rng, m), rand_c(rng, m), rand_c(rng, m, m)
    direct = np.diag(a) @ b @ np.diag(c).conj().T
    assert np.abs(diagonal_sandwich(a, b, c) - direct).max() < 1e-12


def test_dyad_product_form_examples():
    assert np.abs(dyad_product_form(np.eye(2), np.eye(2)) - np.ones((2, 2))).max() < 1e-15
    assert np.abs(dyad_product_form(SIGMA["z"], np.eye(2)) - np.array([[1, 1], [-1, -1]])).max() < 1e-15
    rng = np.random.default_rng(4)
    a, c = rand_c(rng, 4), rand_c(rng, 4)
    assert np.abs(dyad_product_form(np.diag(a), np.diag(c)) - np.outer(a, c.conj())).max() < 1e-12
    with pytest.raises(ValueError):
        dyad_product_form(SIGMA["x"], np.eye(2))


def test_hadamard_transform_op():
    h1 = hadamard_transform_op(1)
    assert np.abs(h1 - (SIGMA["x"] + SIGMA["z"]) / np.sqrt(2)).max() < 1e-15
    assert np.abs(h1 @ SIGMA["z"] @ h1 - SIGMA["x"]).max() < 1e-15
    for n in range(1, 6):
        h = hadamard_transform_op(n)
        eye = np.eye(2**n)
        assert np.abs(h @ h - eye).max() < 1e-13
        assert np.abs(h.conj().T @ h - eye).max() < 1e-13
        assert np.abs(h - h.conj().T).max() == 0


def test_tolerance_helpers():
    assert allclose(np.eye(2), np.eye(2) + ATOL / 2)
    assert not allclose(np.eye(2), np.eye(2) + 1e-6)
    assert allclose(np.eye(2), np.eye(2) + 1e-6, tol=1e-5)
    assert not allclose(np.eye(2), np.eye(4))
    assert is_diagonal(np.diag([1, 2]))
    assert not is_diagonal(SIGMA["x"])


def test_n_spins_of():
    assert n_spins_of(np.eye(8)) == 3
    assert n_spins_of(np.ones(4)) == 2
    for bad in (np.eye(3), np.ones((2, 4)), np.ones(1)):
        with pytest.raises(ValueError):
            n_spins_of(bad)
