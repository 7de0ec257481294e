import itertools
import math

import mpmath
import numpy as np
import pytest
from scipy.linalg import expm

from circgate.exceptions import ContractViolationError, DomainError, NotPositiveSemidefiniteError
from circgate.numerics import (
    LogFactor,
    clebsch_gordan,
    hermitian_eig,
    hermitian_function,
    is_hermitian,
    kron,
    log_product,
    matrix_exp,
    project_psd,
    psd_sqrt,
    rk4_integrate,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def test_log_product_small_values():
    assert log_product([(2, 10), (3, -2)]) == pytest.approx(1024 / 9, rel=1e-13)
    assert log_product([(2, 3)], leading_sign=-1) == pytest.approx(-8.0, rel=1e-13)
    assert log_product([]) == 1.0


def test_log_product_beyond_float_range_intermediates():
    mpmath.mp.dps = 50
    expected = mpmath.mpf(2) ** 4000 * mpmath.mpf(3) ** -2500
    assert log_product([(2, 4000), (3, -2500)]) == pytest.approx(float(expected), rel=1e-10)


@pytest.mark.parametrize("base", [0, -1.5])
def test_log_product_rejects_non_positive_base(base):
    with pytest.raises(DomainError):
        log_product([(base, 2)])


def test_log_product_rejects_bad_sign():
    with pytest.raises(DomainError):
        log_product([(2, 1)], leading_sign=0)


def test_log_factor_arithmetic():
    product = LogFactor.from_value(-2.0) * LogFactor.from_value(3.0)
    assert product.value == pytest.approx(-6.0)
    quotient = LogFactor.power(2, 10) / LogFactor.from_value(-4.0)
    assert quotient.value == pytest.approx(-256.0)
    with pytest.raises(DomainError):
        LogFactor.from_value(0.0)
    with pytest.raises(DomainError):
        LogFactor.power(0.0, 3)


def test_hermitian_eig_sorted_and_orthonormal():
    eigenvalues, eigenvectors = hermitian_eig(X)
    np.testing.assert_allclose(eigenvalues, [-1.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(eigenvectors.conj().T @ eigenvectors, np.eye(2), atol=1e-14)


def test_hermitian_eig_rejects_non_hermitian():
    assert not is_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ContractViolationError):
        hermitian_eig(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ContractViolationError):
        hermitian_eig(np.ones((2, 3)))


@pytest.mark.parametrize("dim", [2, 16, 64, 256])
def test_hermitian_eig_reconstructs_random_matrices(rng, dim):
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    M = A + A.conj().T
    eigenvalues, eigenvectors = hermitian_eig(M)
    assert np.all(np.diff(eigenvalues) >= 0)
    np.testing.assert_allclose(eigenvectors.conj().T @ eigenvectors, np.eye(dim), atol=1e-12)
    rebuilt = (eigenvectors * eigenvalues) @ eigenvectors.conj().T
    assert np.max(np.abs(rebuilt - M)) <= 1e-12 * dim * np.max(np.abs(M))


def test_hermitian_function_matches_expm():
    H = np.array([[1.0, 0.5 - 0.2j], [0.5 + 0.2j, -0.3]])
    np.testing.assert_allclose(hermitian_function(H, np.exp), expm(H), atol=1e-12)


def test_psd_sqrt():
    np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)
    root = psd_sqrt(np.diag([1.0, -1e-14]))
    assert root[1, 1] == 0.0
    with pytest.raises(NotPositiveSemidefiniteError) as info:
        psd_sqrt(np.diag([1.0, -0.1]))
    assert info.value.min_eigenvalue == pytest.approx(-0.1)


def test_project_psd_clips_negative_spectrum():
    np.testing.assert_allclose(project_psd(Z), np.diag([1.0, 0.0]), atol=1e-15)


def test_kron_chains_factors():
    result = kron(np.eye(2), X, Z)
    assert result.shape == (8, 8)
    np.testing.assert_allclose(result, np.kron(np.kron(np.eye(2), X), Z))


def test_matrix_exp_hermitian_path():
    H = np.array([[0.2, 1.0], [1.0, -0.7]], dtype=complex)
    np.testing.assert_allclose(matrix_exp(H), expm(H), atol=1e-12)


def test_matrix_exp_anti_hermitian_is_unitary_rotation():
    t = 0.37
    U = matrix_exp(-1j * t * X)
    np.testing.assert_allclose(U, math.cos(t) * np.eye(2) - 1j * math.sin(t) * X, atol=1e-14)


def test_matrix_exp_non_normal_generator():
    N = np.array([[0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(matrix_exp(N), [[1.0, 1.0], [0.0, 1.0]], atol=1e-14)


def test_rk4_constant_generator():
    y = rk4_integrate(np.array([[-1.0]]), np.array([1.0]), (0.0, 1.0), 100)
    assert y[0].real == pytest.approx(math.exp(-1.0), rel=1e-8)


def test_rk4_time_dependent_generator():
    y = rk4_integrate(lambda t: np.array([[t]]), np.array([1.0]), (0.0, 1.0), 200)
    assert y[0].real == pytest.approx(math.exp(0.5), rel=1e-8)


def test_rk4_needs_a_step():
    with pytest.raises(DomainError):
        rk4_integrate(np.eye(1), np.ones(1), (0.0, 1.0), 0)


@pytest.mark.parametrize(
    "args, expected",
    [
        ((0.5, 0.5, 0.5, -0.5, 1, 0), 1 / math.sqrt(2)),
        ((0.5, 0.5, 0.5, -0.5, 0, 0), 1 / math.sqrt(2)),
        ((1, 1, 1, -1, 2, 0), 1 / math.sqrt(6)),
        ((1, -1, 1, -1, 2, -2), 1.0),
        ((1, 0, 1, 0, 1, 0), 0.0),
        ((5, 5, 1, 1, 6, 6), 1.0),
    ],
)
def test_clebsch_gordan_known_values(args, expected):
    assert clebsch_gordan(*args) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize(
    "args",
    [
        (1, 1, 1, 1, 2, 0),  # m1 + m2 != M
        (1, 2, 1, 0, 2, 2),  # |m1| > j1
        (1, 0, 1, 0, 3, 0),  # triangle
        (0.5, 0.5, 0.5, 0.5, 0.5, 1),  # |M| > J
    ],
)
def test_clebsch_gordan_selection_rules_give_zero(args):
    assert clebsch_gordan(*args) == 0.0


def test_clebsch_gordan_rejects_non_half_integer():
    with pytest.raises(DomainError):
        clebsch_gordan(0.3, 0.3, 1, 0, 1, 0.3)


def _projections(j):
    return [-j + k for k in range(int(round(2 * j)) + 1)]


@pytest.mark.parametrize("j1, j2", list(itertools.combinations_with_replacement([0.5, 1, 1.5, 2, 2.5, 3], 2)))
def test_clebsch_gordan_coupling_matrix_is_orthogonal(j1, j2):
    uncoupled = [(m1, m2) for m1 in _projections(j1) for m2 in _projections(j2)]
    coupled = [(J, M) for J in (abs(j1 - j2) + k for k in range(int(round(2 * min(j1, j2))) + 1))
               for M in _projections(J)]
    assert len(coupled) == len(uncoupled)
    C = np.zeros((len(uncoupled), len(coupled)))
    for row, (m1, m2) in enumerate(uncoupled):
        for col, (J, M) in enumerate(coupled):
            if m1 + m2 == M:
                C[row, col] = clebsch_gordan(j1, m1, j2, m2, J, M)
    np.testing.assert_allclose(C.T @ C, np.eye(len(coupled)), atol=1e-12)
    np.testing.assert_allclose(C @ C.T, np.eye(len(uncoupled)), atol=1e-12)
