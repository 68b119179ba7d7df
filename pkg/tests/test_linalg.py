import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_unitary
from oracles import dft_entry
from qnewcomb import linalg
from qnewcomb.errors import ValidationError

F = linalg.hadamard()
N = linalg.negation()
I2 = linalg.identity(2)


def test_mat_mul_identity_and_hadamard_square(rng):
    a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    assert np.array_equal(linalg.mat_mul(I2, a), a)
    # (1/2)[[1,1],[1,-1]]^2 = I by hand
    assert np.max(np.abs(linalg.mat_mul(F, F) - I2)) <= 1e-15


@pytest.mark.parametrize("a", [0.0, 0.3, -0.4, 1.0])
def test_negation_sandwich_keeps_symmetric_matrix(a):
    m = np.array([[1, a], [a, 1]], dtype=complex)
    assert np.array_equal(linalg.mat_mul(linalg.mat_mul(N, m), N), m)


def test_mat_mul_rejects_mismatch():
    with pytest.raises(ValidationError):
        linalg.mat_mul(np.eye(2), np.eye(3))


def test_kron_basics():
    assert np.array_equal(linalg.kron(I2, I2), np.eye(4))
    k00 = np.array([1, 0, 0, 0], dtype=complex)
    out = linalg.kron(F, I2) @ k00
    # F|0> = (|0> + |1>)/sqrt2, so |00> -> (|00> + |10>)/sqrt2
    np.testing.assert_allclose(out, np.array([1, 0, 1, 0]) / math.sqrt(2), atol=1e-15)


def test_kron_index_convention(rng):
    # integer entries keep every product exact
    a = rng.integers(-9, 10, size=(2, 3)) + 1j * rng.integers(-9, 10, size=(2, 3))
    b = rng.integers(-9, 10, size=(4, 2)) + 1j * rng.integers(-9, 10, size=(4, 2))
    k = linalg.kron(a, b)
    assert k.shape == (8, 6)
    for i in range(2):
        for j in range(3):
            for p in range(4):
                for q in range(2):
                    assert k[i * 4 + p, j * 2 + q] == a[i, j] * b[p, q]


@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_kron_dimension_law(r1, c1, r2, c2):
    assert linalg.kron(np.ones((r1, c1)), np.ones((r2, c2))).shape == (r1 * r2, c1 * c2)


def test_kron_mixed_product(rng):
    for _ in range(200):
        A, B, C, D = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
        lhs = linalg.kron(A, B) @ linalg.kron(C, D)
        rhs = linalg.kron(A @ C, B @ D)
        assert np.max(np.abs(lhs - rhs)) <= 1e-13


def test_adjoint(rng):
    a = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    assert np.array_equal(linalg.adjoint(linalg.adjoint(a)), a)
    assert np.array_equal(linalg.adjoint(F), F)
    np.testing.assert_array_equal(linalg.adjoint(np.array([[0, 1j], [0, 0]])), np.array([[0, 0], [-1j, 0]]))


def test_trace(rng):
    assert linalg.trace(np.eye(4)) == 4
    p = linalg.outer([1, 0], [1, 0])
    assert linalg.trace(linalg.kron(p, p)) == 1
    for _ in range(100):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert abs(linalg.trace(a @ b) - linalg.trace(b @ a)) <= 1e-13
    with pytest.raises(ValidationError):
        linalg.trace(np.ones((2, 3)))


def test_outer(rng):
    np.testing.assert_array_equal(linalg.outer([1, 0], [1, 0]), [[1, 0], [0, 0]])
    k = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert abs(linalg.trace(linalg.outer(k, k)) - np.vdot(k, k)) <= 1e-13
    plus = np.array([1, 1]) / math.sqrt(2)
    np.testing.assert_allclose(linalg.outer(plus, plus), 0.5 * np.ones((2, 2)), atol=1e-15)


def test_is_unitary():
    assert linalg.is_unitary(F, 1e-12)
    assert linalg.is_unitary(N)
    assert linalg.is_unitary(I2)
    assert not linalg.is_unitary(np.diag([1, 2]))


@pytest.mark.parametrize("m", range(1, 17))
def test_dft_unitary_and_rejects_scaled(m):
    d = linalg.dft_matrix(m)
    assert np.max(np.abs(d.conj().T @ d - np.eye(m))) <= 1e-12
    assert linalg.is_unitary(d)
    assert not linalg.is_unitary(1.01 * d)


def test_dft_entries_match_definition():
    for m in (3, 5, 8):
        d = linalg.dft_matrix(m)
        for s in range(m):
            for k in range(m):
                assert abs(d[s, k] - dft_entry(m, s, k)) <= 1e-14


def test_dft_small_cases():
    np.testing.assert_array_equal(linalg.dft_matrix(1), [[1]])
    assert np.max(np.abs(linalg.dft_matrix(2) - np.array([[1, 1], [1, -1]]) / math.sqrt(2))) <= 1e-15
    np.testing.assert_allclose(linalg.dft_matrix(4)[1], np.array([1, 1j, -1, -1j]) / 2, atol=1e-15)


def test_unitaries_rejected_when_scaled(rng):
    for u in (F, N, I2, random_unitary(rng, 3)):
        assert linalg.is_unitary(u)
        assert not linalg.is_unitary(1.01 * u)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6, 9, 16])
def test_jacobi_matches_lapack(rng, n):
    for _ in range(10):
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = x + x.conj().T
        w, v = linalg.jacobi_eigh(h, vectors=True)
        np.testing.assert_allclose(w, np.linalg.eigvalsh(h), atol=1e-12)
        assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - h)) <= 1e-12
        assert linalg.is_unitary(v, 1e-12)


def test_jacobi_degenerate_and_diagonal():
    w, _ = linalg.jacobi_eigh(np.diag([3.0, 1.0, 1.0, 2.0]))
    np.testing.assert_array_equal(w, [1, 1, 2, 3])
    w, _ = linalg.jacobi_eigh(np.ones((4, 4)))
    np.testing.assert_allclose(w, [0, 0, 0, 4], atol=1e-14)


def test_jacobi_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        linalg.jacobi_eigh(np.array([[0, 1], [0, 0]]))


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_is_psd_on_density_matrices(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 4)
    assert linalg.is_psd(rho)
    # shifting by more than the tolerance below zero must be caught
    lam = linalg.min_eigenvalue(rho)
    assert not linalg.is_psd(rho - (lam + 1e-6) * np.eye(4))


def test_partial_traces(rng):
    a, b = random_density(rng, 2), random_density(rng, 3)
    j = linalg.kron(a, b)
    np.testing.assert_allclose(linalg.partial_trace_second(j, 2, 3), a, atol=1e-15)
    np.testing.assert_allclose(linalg.partial_trace_first(j, 2, 3), b, atol=1e-15)


def test_non_finite_rejected():
    with pytest.raises(ValidationError):
        linalg.as_matrix([[np.nan, 0], [0, 1]])
    with pytest.raises(ValidationError):
        linalg.normalized([0, 0])
