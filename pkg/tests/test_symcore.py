from itertools import product
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sympt.symcore import (
    CompressedState,
    InvalidInputError,
    ProductVector,
    SymmetricState,
    compress_half,
    compression_isometry,
    dicke_embedding,
    expand_to_full,
    full_partial_transpose,
    half_map,
    isometry_variant,
    oracle_view,
    partial_transpose_view,
    product_state_coords,
    random_state,
)

seeds = st.integers(0, 2**32 - 1)


def full_product(alpha, n):
    """|psi>^{(x)n} by repeated Kronecker products."""
    v = np.array([1, alpha], dtype=complex)
    out = np.ones(1, dtype=complex)
    for _ in range(n):
        out = np.kron(out, v)
    return out


# -- SymmetricState --------------------------------------------------------

def test_rejects_wrong_shape():
    with pytest.raises(InvalidInputError):
        SymmetricState(3, np.eye(3))


def test_rejects_non_hermitian():
    m = np.eye(3, dtype=complex) / 3
    m[0, 1] = 1e-3
    with pytest.raises(InvalidInputError):
        SymmetricState(2, m)


def test_rejects_nan():
    m = np.eye(3) / 3
    m[1, 1] = np.nan
    with pytest.raises(InvalidInputError):
        SymmetricState(2, m)


def test_check_density_catches_trace_and_negativity():
    with pytest.raises(InvalidInputError):
        SymmetricState(2, np.eye(3)).check_density()
    with pytest.raises(InvalidInputError):
        SymmetricState(1, np.diag([1.5, -0.5])).check_density()


def test_matrix_is_read_only():
    s = SymmetricState.maximally_mixed(3)
    with pytest.raises(ValueError):
        s.matrix[0, 0] = 1


# -- product coordinates ---------------------------------------------------

def test_coords_alpha_zero():
    np.testing.assert_allclose(product_state_coords(ProductVector.from_alpha(0), 4), [1, 0, 0, 0, 0])


def test_coords_alpha_one():
    v = product_state_coords(ProductVector.from_alpha(1), 2)
    np.testing.assert_allclose(v, [1, np.sqrt(2), 1])
    assert np.vdot(v, v).real == pytest.approx(4)


def test_coords_alpha_i_against_tensor_expansion():
    v = product_state_coords(ProductVector.from_alpha(1j), 3)
    s3 = np.sqrt(3)
    np.testing.assert_allclose(v, [1, 1j * s3, -s3, -1j], atol=1e-15)
    np.testing.assert_allclose(dicke_embedding(3).T @ v, full_product(1j, 3), atol=1e-14)


@given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), st.integers(1, 12))
def test_coords_norm(alpha, n):
    v = product_state_coords(ProductVector.from_alpha(alpha), n)
    expected = (1 + abs(alpha) ** 2) ** n
    assert np.vdot(v, v).real == pytest.approx(expected, rel=1e-12)


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), st.integers(2, 7))
def test_coords_match_full_expansion(alpha, n):
    v = product_state_coords(ProductVector.from_alpha(alpha), n)
    np.testing.assert_allclose(dicke_embedding(n).T @ v, full_product(alpha, n), atol=1e-9 * (1 + abs(alpha)) ** n)


def test_partially_conjugated_coords_are_bipartite():
    e = ProductVector.from_alpha(0.3 + 0.7j)
    n, k = 5, 2
    v = product_state_coords(e, n, k)
    left = product_state_coords(e, k).conj()
    right = product_state_coords(e, n - k)
    np.testing.assert_allclose(v, np.kron(left, right))


# -- compression isometry --------------------------------------------------

def test_isometry_n2_k1_entries():
    b = compression_isometry(2, 1)
    h = np.sqrt(0.5)
    expected = np.zeros((4, 3))
    expected[0, 0], expected[1, 1], expected[2, 1], expected[3, 2] = 1, h, h, 1
    np.testing.assert_allclose(b, expected, atol=1e-15)


def test_isometry_n4_k2_centre_entry():
    b = compression_isometry(4, 2)
    assert b[1 * 3 + 1, 2] == pytest.approx(np.sqrt(2 / 3), abs=1e-15)
    assert isometry_variant(4, 2) == "split"


@pytest.mark.parametrize("n", range(2, 21))
def test_isometry_is_exact(n):
    for k in range(1, n // 2 + 1):
        b = compression_isometry(n, k)
        assert np.abs(b.T @ b - np.eye(n + 1)).max() < 1e-12


def test_isometry_rejects_bad_k():
    with pytest.raises(InvalidInputError):
        compression_isometry(4, 3)
    with pytest.raises(InvalidInputError):
        compression_isometry(4, 0)


def test_isometry_maps_product_to_product():
    # B_k sends e^{(x)N} to e^{(x)k} (x) e^{(x)(N-k)}; checked with independent tensor products
    e = ProductVector.from_alpha(0.4 - 1.1j)
    n = 6
    for k in range(1, 4):
        lhs = compression_isometry(n, k) @ product_state_coords(e, n)
        rhs = np.kron(product_state_coords(e, k), product_state_coords(e, n - k))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


# -- partial transpose views -----------------------------------------------

def test_triplet_view_eigenvalues():
    s = SymmetricState.dicke(2, 1)
    lam = np.sort(np.linalg.eigvalsh(partial_transpose_view(s, 1).matrix))
    np.testing.assert_allclose(lam, [-0.5, 0.5, 0.5, 0.5], atol=1e-14)


@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), st.integers(2, 10))
def test_product_state_views_are_rank_one(alpha, n):
    s = SymmetricState.product_mixture(n, [1.0], [ProductVector.from_alpha(alpha)])
    for k in range(1, n // 2 + 1):
        lam = np.linalg.eigvalsh(partial_transpose_view(s, k).matrix)
        assert lam[0] > -1e-12
        assert np.sum(lam > 1e-9) == 1


def test_identity_view_full_rank():
    s = SymmetricState.maximally_mixed(4)
    v = partial_transpose_view(s, 2).matrix
    ref = oracle_view(s, 2)
    assert np.linalg.matrix_rank(ref, tol=1e-10) == 9
    assert np.linalg.matrix_rank(v, tol=1e-10) == 9


@given(seeds, st.integers(2, 8), st.booleans())
def test_views_match_full_space_oracle(seed, n, low_rank):
    rng = np.random.default_rng(seed)
    s = random_state(n, rng, int(rng.integers(1, n + 1)) if low_rank else None)
    for k in range(1, n // 2 + 1):
        assert np.abs(partial_transpose_view(s, k).matrix - oracle_view(s, k)).max() < 1e-10


@given(seeds, st.integers(2, 8))
def test_views_preserve_trace_and_hermiticity(seed, n):
    s = random_state(n, np.random.default_rng(seed))
    for k in range(1, n // 2 + 1):
        v = partial_transpose_view(s, k).matrix
        assert abs(np.trace(v) - 1) < 1e-10
        assert np.abs(v - v.conj().T).max() < 1e-12


# -- full-space embedding --------------------------------------------------

def test_expand_n1_is_identity():
    m = np.array([[0.7, 0.1 - 0.2j], [0.1 + 0.2j, 0.3]])
    np.testing.assert_allclose(expand_to_full(SymmetricState(1, m)), m)


def test_expand_triplet():
    full = expand_to_full(SymmetricState.dicke(2, 1))
    expected = np.zeros((4, 4))
    for i, j in product((1, 2), repeat=2):
        expected[i, j] = 0.5
    np.testing.assert_allclose(full, expected, atol=1e-15)


def test_expand_identity_is_symmetric_projector():
    full = expand_to_full(SymmetricState.maximally_mixed(4))
    lam = np.linalg.eigvalsh(full * 5)
    np.testing.assert_allclose(np.sort(lam)[-5:], np.ones(5), atol=1e-12)
    np.testing.assert_allclose(np.sort(lam)[:-5], np.zeros(11), atol=1e-12)
    # invariant under swapping the first two qubits
    t = full.reshape([2] * 8).transpose(1, 0, 2, 3, 5, 4, 6, 7).reshape(16, 16)
    np.testing.assert_allclose(t, full, atol=1e-15)


def test_full_partial_transpose_is_involution(rng):
    rho = expand_to_full(random_state(4, rng))
    twice = full_partial_transpose(full_partial_transpose(rho, 4, 2), 4, 2)
    np.testing.assert_allclose(twice, rho)


def test_expand_refuses_large_n():
    with pytest.raises(InvalidInputError):
        expand_to_full(SymmetricState.maximally_mixed(13))


# -- half compression ------------------------------------------------------

def test_half_map_n4_coefficients():
    f = half_map(4)
    assert f[0 * 3 + 1, 1] == pytest.approx(np.sqrt(2 / 4))
    assert f[1 * 3 + 1, 3] == pytest.approx(np.sqrt(2 / 4))
    assert f[0 * 3 + 2, 2] == pytest.approx(np.sqrt(1 / 6))
    assert f[1 * 3 + 0, 2] == pytest.approx(np.sqrt(1 / 6))


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), st.integers(2, 11))
def test_half_map_defining_action(alpha, n):
    f, c = n // 2, (n + 1) // 2
    lhs = half_map(n) @ product_state_coords(ProductVector.from_alpha(alpha), n)
    rhs = np.kron([1, alpha ** c], product_state_coords(ProductVector.from_alpha(alpha), f))
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + abs(alpha)) ** n)


def test_compress_pure_zero_state():
    s = SymmetricState.product_mixture(4, [1.0], [ProductVector(1, 0)])
    out = compress_half(s).matrix
    expected = np.zeros((6, 6))
    expected[0, 0] = 1
    np.testing.assert_allclose(out, expected, atol=1e-15)


@pytest.mark.parametrize("n", range(2, 11))
def test_compress_round_trip_and_rank(n):
    rng = np.random.default_rng(n)
    for i in range(50):
        rank = None if i % 2 else int(rng.integers(1, n + 2))
        s = random_state(n, rng, rank)
        c = compress_half(s)
        assert isinstance(c, CompressedState)
        assert np.linalg.matrix_rank(c.matrix, tol=1e-10) == np.linalg.matrix_rank(s.matrix, tol=1e-10)
        back = compress_half(c, invert=True)
        np.testing.assert_allclose(back.matrix, s.matrix, atol=1e-12)


def test_binomials_are_exact():
    from sympt.symcore import binomials

    assert binomials(30) == tuple(comb(30, m) for m in range(31))
