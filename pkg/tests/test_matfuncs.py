import numpy as np
import pytest

from floqlind.errors import (
    BranchCutError,
    NonDiagonalizableError,
    NotHermitianError,
    NotSquareError,
    SingularMatrixError,
)
from floqlind.linalg.matfuncs import (
    conjugation_mismatch,
    hermitian_min_eig,
    is_hermitian,
    is_psd,
    match_multisets,
    matrix_exp,
    matrix_log,
)


def test_exp_log_round_trip(rng):
    m = 0.3 * rng.normal(size=(4, 4))
    back = matrix_log(matrix_exp(m))
    assert np.allclose(back, m, atol=1e-10)
    assert np.all(back.imag == 0)


def test_log_of_rotation_has_principal_arguments():
    theta = 2.5
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    log = matrix_log(rot)
    assert np.allclose(np.sort(np.linalg.eigvals(log).imag), [-theta, theta])
    assert np.allclose(matrix_exp(log), rot)


def test_branch_cut_policy():
    m = np.diag([-1.0, 2.0])
    with pytest.raises(BranchCutError):
        matrix_log(m)
    log = matrix_log(m, on_branch_cut="principal")
    assert np.isclose(log[0, 0], 1j * np.pi)
    assert np.isclose(log[1, 1], np.log(2.0))


def test_singular_and_defective_inputs():
    with pytest.raises(SingularMatrixError):
        matrix_log(np.diag([1.0, 0.0]))
    with pytest.raises(SingularMatrixError):
        matrix_log(np.zeros((2, 2)))
    with pytest.raises(NonDiagonalizableError):
        matrix_log(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(NotSquareError):
        matrix_exp(np.ones((2, 3)))


def test_hermitian_helpers():
    h = np.array([[2.0, 1j], [-1j, 2.0]])
    assert is_hermitian(h)
    assert np.isclose(hermitian_min_eig(h), 1.0)
    assert is_psd(h)
    assert not is_psd(np.diag([1.0, -0.5]))
    with pytest.raises(NotHermitianError):
        hermitian_min_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_multiset_matching_and_conjugation():
    a = np.array([1.0, 2j, -3.0])
    b = np.array([-3.0, 1.0, 2j])
    perm = match_multisets(a, b)
    assert np.allclose(b[perm], a)
    assert conjugation_mismatch(np.array([1 + 1j, 1 - 1j, 0.5])) < 1e-15
    assert np.isclose(conjugation_mismatch(np.array([1 + 1j, 0.5])), 2.0)
