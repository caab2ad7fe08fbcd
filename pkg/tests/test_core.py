import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdgate.core import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    DimensionError,
    NotHermitianError,
    Operator,
    StateVector,
    annihilation,
    basis_state,
    eigensystem_hermitian,
    expectation,
    identity,
    tensor_product,
    tensor_states,
)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def test_identity_kron():
    out = tensor_product(identity(2), identity(3))
    assert out.dim == 6
    assert np.allclose(out.matrix, np.eye(6))


def test_kron_basis_permutation():
    x = Operator(SIGMA_X, ("0", "1"))
    op = tensor_product(x, identity(2, ("0", "1")))
    psi = tensor_states(basis_state(0, 2, ("0", "1")), basis_state(1, 2, ("0", "1")))
    out = op.matrix @ psi.amplitudes
    want = tensor_states(basis_state(1, 2, ("0", "1")), basis_state(1, 2, ("0", "1")))
    assert np.allclose(out, want.amplitudes)
    assert op.labels == ("0,0", "0,1", "1,0", "1,1")


def test_kron_diagonal():
    out = tensor_product(Operator(np.diag([1, 2])), Operator(np.diag([3, 4])))
    assert np.allclose(np.diag(out.matrix), [3, 4, 6, 8])


def test_kron_associative():
    rng = np.random.default_rng(1)
    a, b, c = (Operator(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))) for k in (2, 3, 2))
    left = tensor_product(tensor_product(a, b), c)
    right = tensor_product(a, tensor_product(b, c))
    assert np.max(np.abs(left.matrix - right.matrix)) < 1e-12


def test_sigma_z_eigensystem():
    pairs = eigensystem_hermitian(Operator(SIGMA_Z, hermitian=True))
    assert [p[0] for p in pairs] == pytest.approx([-1.0, 1.0])


@given(st.floats(0, 2 * np.pi), st.floats(0.1, 5))
def test_rotated_drive_eigenvalues(phi, om):
    h = Operator(0.5 * om * (np.cos(phi) * SIGMA_X + np.sin(phi) * SIGMA_Y), hermitian=True)
    w = [p[0] for p in eigensystem_hermitian(h)]
    assert w == pytest.approx([-om / 2, om / 2], abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 32), st.integers(0, 2**31))
def test_eigensystem_reconstruction(n, seed):
    m = random_hermitian(np.random.default_rng(seed), n)
    pairs = eigensystem_hermitian(Operator(m, hermitian=True))
    w = np.array([p[0] for p in pairs])
    v = np.stack([p[1].amplitudes for p in pairs], axis=1)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(v.conj().T @ v - np.eye(n))) < 1e-10
    assert np.max(np.abs(m @ v - v * w)) < 1e-10
    assert np.max(np.abs((v * w) @ v.conj().T - m)) < 1e-9


def test_eigensystem_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eigensystem_hermitian(Operator(np.array([[0, 1], [0, 0]])))


def test_expectations():
    zero = basis_state(0, 2)
    plus = StateVector([1, 1], normalize=True)
    assert expectation(Operator(SIGMA_Z), zero) == pytest.approx(1)
    assert expectation(Operator(SIGMA_X), plus) == pytest.approx(1)
    assert expectation(Operator(SIGMA_X), zero) == pytest.approx(0)


def test_expectation_dimension_mismatch():
    with pytest.raises(DimensionError):
        expectation(identity(3), basis_state(0, 2))


def test_operator_validation():
    with pytest.raises(DimensionError):
        Operator(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        Operator(np.eye(2), ("a",))
    with pytest.raises(NotHermitianError):
        Operator(np.array([[0, 1], [0, 0]]), hermitian=True)
    with pytest.raises(ValueError):
        Operator(np.array([[np.nan, 0], [0, 1]]))


def test_operator_is_immutable():
    op = identity(2)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2


def test_state_norm_checked():
    with pytest.raises(ValueError):
        StateVector([1, 1])
    s = StateVector([3, 4], normalize=True)
    assert np.isclose(np.linalg.norm(s.amplitudes), 1)
    with pytest.raises(ValueError):
        StateVector([0, 0], normalize=True)


def test_density_matrix_invariants():
    rho = basis_state(1, 3).projector()
    assert isinstance(rho, DensityMatrix)
    assert np.allclose(rho.populations(), [0, 1, 0])
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.2, -0.2]))
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.1], [0.3, 0.5]]))
    mixed = DensityMatrix.maximally_mixed(4)
    assert np.isclose(np.trace(mixed.matrix).real, 1)


def test_annihilation():
    a = annihilation(2)
    assert np.allclose(a @ np.array([0, 0, 1]), [0, np.sqrt(2), 0])
    assert np.allclose(np.diag(a.conj().T @ a), [0, 1, 2])
