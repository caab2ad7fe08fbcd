"""Small dense linear-algebra layer shared by the rest of the package.

Everything is dimensionless with hbar = 1. Operators carry a basis label list
so that Kronecker products and CSV exports keep track of which ket is which.
The three-level basis is ordered ``(0, e, 1)``; composite spaces are ordered
qubit 1 (x) qubit 2 (x) resonator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

HERMITIAN_ATOL = 1e-12
NORM_ATOL = 1e-9

THREE_LEVEL_LABELS = ("0", "e", "1")
QUBIT_LABELS = ("0", "1")


class DimensionError(ValueError):
    """Operands live in spaces of different dimension."""


class NotHermitianError(ValueError):
    """An operation that needs a Hermitian matrix received something else."""


def _default_labels(dim: int) -> tuple[str, ...]:
    return tuple(str(k) for k in range(dim))


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains NaN or Inf")


@dataclass(frozen=True)
class Operator:
    """Dense square complex matrix tied to a basis label list."""

    matrix: np.ndarray
    labels: tuple[str, ...] = ()
    hermitian: bool = False

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionError(f"operator must be a non-empty square matrix, got {m.shape}")
        _check_finite(m, "operator")
        labels = tuple(self.labels) if self.labels else _default_labels(m.shape[0])
        if len(labels) != m.shape[0]:
            raise DimensionError(f"{len(labels)} labels for a {m.shape[0]}-dim operator")
        if self.hermitian and not np.allclose(m, m.conj().T, rtol=0.0, atol=HERMITIAN_ATOL):
            raise NotHermitianError("matrix flagged hermitian is not Hermitian within 1e-12")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.labels, self.hermitian)

    def is_hermitian(self, atol: float = HERMITIAN_ATOL) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, rtol=0.0, atol=atol))

    def is_unitary(self, atol: float = 1e-12) -> bool:
        m = self.matrix
        return bool(np.allclose(m.conj().T @ m, np.eye(self.dim), rtol=0.0, atol=atol))

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _same_dim(self.dim, other.dim)
            return Operator(self.matrix @ other.matrix, self.labels)
        if isinstance(other, StateVector):
            _same_dim(self.dim, other.dim)
            return StateVector(self.matrix @ other.amplitudes, self.labels)
        return NotImplemented

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state."""

    amplitudes: np.ndarray
    labels: tuple[str, ...] = ()
    normalize: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if v.size == 0:
            raise DimensionError("empty state vector")
        _check_finite(v, "state vector")
        n = np.linalg.norm(v)
        if self.normalize:
            if n == 0:
                raise ValueError("cannot normalize the zero vector")
            v = v / n
        elif abs(n * n - 1.0) > NORM_ATOL:
            raise ValueError(f"state vector has squared norm {n * n:.12g}, expected 1")
        labels = tuple(self.labels) if self.labels else _default_labels(v.size)
        if len(labels) != v.size:
            raise DimensionError(f"{len(labels)} labels for a {v.size}-dim state")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def projector(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.labels)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    matrix: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        _check_finite(m, "density matrix")
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=1e-10):
            raise ValueError("density matrix is not Hermitian within 1e-10")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-8:
            raise ValueError(f"density matrix has trace {tr:.12g}")
        lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
        if lo < -1e-8:
            raise ValueError(f"density matrix has eigenvalue {lo:.3e} < -1e-8")
        labels = tuple(self.labels) if self.labels else _default_labels(m.shape[0])
        if len(labels) != m.shape[0]:
            raise DimensionError(f"{len(labels)} labels for a {m.shape[0]}-dim density matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def populations(self) -> np.ndarray:
        return np.diagonal(self.matrix).real.copy()

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def _same_dim(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"dimension mismatch: {a} vs {b}")


def as_matrix(m) -> np.ndarray:
    return np.asarray(m.matrix if isinstance(m, (Operator, DensityMatrix)) else m, dtype=complex)


def as_vector(s) -> np.ndarray:
    return np.asarray(s.amplitudes if isinstance(s, StateVector) else s, dtype=complex).reshape(-1)


def tensor_product(a: Operator, b: Operator) -> Operator:
    """Kronecker product; labels are joined pairwise as ``"la,lb"``."""
    labels = tuple(f"{x},{y}" for x in a.labels for y in b.labels)
    return Operator(np.kron(a.matrix, b.matrix), labels, a.hermitian and b.hermitian)


def tensor_states(*states: StateVector) -> StateVector:
    v = np.ones(1, dtype=complex)
    labels: list[str] = [""]
    for s in states:
        v = np.kron(v, s.amplitudes)
        labels = [f"{x},{y}" if x else y for x in labels for y in s.labels]
    return StateVector(v, tuple(labels), normalize=True)


def eigensystem_hermitian(m: Operator) -> list[tuple[float, StateVector]]:
    """Ascending eigenpairs of a Hermitian operator."""
    mat = as_matrix(m)
    if not np.allclose(mat, mat.conj().T, rtol=0.0, atol=HERMITIAN_ATOL):
        raise NotHermitianError("eigensystem_hermitian needs a Hermitian matrix")
    labels = m.labels if isinstance(m, Operator) else ()
    w, v = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    return [(float(w[k]), StateVector(v[:, k], labels, normalize=True)) for k in range(w.size)]


def expectation(m: Operator, s: StateVector) -> complex:
    mat, v = as_matrix(m), as_vector(s)
    _same_dim(mat.shape[0], v.size)
    return complex(np.vdot(v, mat @ v))


def basis_state(index: int, dim: int, labels: Sequence[str] = ()) -> StateVector:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return StateVector(v, tuple(labels))


def ket(label: str, labels: Sequence[str]) -> StateVector:
    return basis_state(list(labels).index(label), len(labels), labels)


def outer(i: int, j: int, dim: int) -> np.ndarray:
    """Matrix unit ``|i><j|``."""
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def identity(dim: int, labels: Sequence[str] = ()) -> Operator:
    return Operator(np.eye(dim), tuple(labels), hermitian=True)


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def annihilation(n_max: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on Fock states 0..n_max."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)
