import numpy as np
import pytest

from floqlind.errors import DimensionMismatchError
from floqlind.linalg.basis import SIGMA_X, SIGMA_Z, frobenius_basis
from floqlind.linalg.superop import (
    apply_superop,
    choi_matrix,
    compose,
    devectorize_map,
    map_decomposition,
    process_matrix,
    star_residual,
    superop_identity,
    tp_residual,
    vectorize_map,
)


def _channel(kraus):
    def _apply(x):
        return sum(k @ x @ k.conj().T for k in kraus)

    return _apply


def test_vectorize_devectorize(rng):
    basis = frobenius_basis(3)
    u = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    s = vectorize_map(lambda x: u @ x @ u.conj().T, basis)
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.allclose(devectorize_map(s)(x), u @ x @ u.conj().T)
    assert tp_residual(s) < 1e-14
    assert star_residual(s) < 1e-14


def test_identity_choi_is_maximally_entangled():
    basis = frobenius_basis(2)
    c = choi_matrix(superop_identity(basis))
    omega = np.zeros(4)
    omega[[0, 3]] = 1.0
    assert np.allclose(c, np.outer(omega, omega))


def test_transpose_is_not_cp():
    basis = frobenius_basis(2)
    s = vectorize_map(lambda x: x.T, basis)
    assert np.linalg.eigvalsh(choi_matrix(s))[0] < -0.5


def test_process_matrix_of_pauli_channel():
    basis = frobenius_basis(2)
    p = 0.3
    kraus = [np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * SIGMA_Z]
    s = vectorize_map(_channel(kraus), basis)
    proc = process_matrix(s)
    # Φ(x) = Σ p_jk F_j x F_k* with F_3 = σ_z/√2 and F_4 = I/√2
    expected = np.zeros((4, 4))
    expected[2, 2] = 2 * p
    expected[3, 3] = 2 * (1 - p)
    assert np.allclose(proc, expected, atol=1e-14)


def test_map_decomposition_of_unitary_conjugation():
    basis = frobenius_basis(2)
    s = vectorize_map(lambda x: SIGMA_X @ x @ SIGMA_X, basis)
    dec = map_decomposition(s)
    assert np.isclose(dec.corner[0, 0], 2.0)
    assert np.allclose(dec.k, 0.5 * np.eye(2) - (dec.e + dec.e.conj().T) / 2)


def test_compose_order():
    basis = frobenius_basis(2)
    a = vectorize_map(lambda x: SIGMA_X @ x, basis)
    b = vectorize_map(lambda x: SIGMA_Z @ x, basis)
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(apply_superop(compose(a, b), x), SIGMA_X @ SIGMA_Z @ x)
    assert np.allclose((a @ b).apply(x), SIGMA_X @ SIGMA_Z @ x)


def test_dimension_mismatch():
    s = superop_identity(frobenius_basis(2))
    with pytest.raises(DimensionMismatchError):
        apply_superop(s, np.eye(3))
    with pytest.raises(DimensionMismatchError):
        compose(s, superop_identity(frobenius_basis(3)))


def test_public_surface():
    import inspect

    from floqlind.linalg import superop

    public = {
        name
        for name, obj in vars(superop).items()
        if inspect.isfunction(obj) and obj.__module__ == superop.__name__ and not name.startswith("_")
    }
    assert public == {
        "apply_superop",
        "choi_matrix",
        "compose",
        "devectorize_map",
        "map_decomposition",
        "process_matrix",
        "star_residual",
        "superop_identity",
        "tp_residual",
        "trace_annihilation_residual",
        "vectorize_map",
    }
