"""Density matrices, named reference states, and random-state ensembles.

Qubit basis convention: |0> = H (horizontal), |1> = V (vertical), tensor
factors ordered left to right, computational basis |0...0> first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-10


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one positive-semidefinite Hermitian matrix of 2 or 3 qubits.

    Construction checks shape, Hermiticity, and trace; ``validate`` adds the
    (more expensive) eigenvalue nonnegativity check.
    """

    matrix: np.ndarray
    n_qubits: int

    def __post_init__(self):
        m = linalg.as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        dim = 2 ** int(self.n_qubits)
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} does not match {self.n_qubits} qubits")
        linalg.require_hermitian(m)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr!r} deviates from 1 beyond {TRACE_TOL}")

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def validate(self) -> "DensityMatrix":
        """Full invariant check including spectrum nonnegativity."""
        w = linalg.hermitian_eigenvalues(self.matrix)
        if w[-1] < EIGENVALUE_FLOOR:
            raise ValueError(f"negative eigenvalue {w[-1]:.3e} below {EIGENVALUE_FLOOR}")
        return self

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def reduced(self, keep) -> np.ndarray:
        """Reduced matrix on the kept qubits (raw array)."""
        return linalg.partial_trace(self.matrix, [2] * self.n_qubits, keep)


def _as_density(matrix: np.ndarray, n_qubits: int) -> DensityMatrix:
    m = (matrix + matrix.conj().T) / 2.0
    return DensityMatrix(matrix=m, n_qubits=n_qubits)


def sample_ginibre(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Square matrix with i.i.d. standard complex Gaussian entries."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    re = rng.standard_normal((dim, dim))
    im = rng.standard_normal((dim, dim))
    return re + 1j * im


def sample_haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix.

    The R-diagonal phases are absorbed into Q, which makes the QR
    factorization unique and the resulting distribution exactly Haar.
    """
    g = sample_ginibre(dim, rng)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def sample_bures_state(n_qubits: int, rng: np.random.Generator) -> DensityMatrix:
    """Random state distributed according to the Bures measure.

    Built as (1 + U^dag) G G^dag (1 + U) normalized to unit trace, with G a
    Ginibre matrix and U Haar-random.
    """
    _check_qubits(n_qubits)
    dim = 2 ** n_qubits
    g = sample_ginibre(dim, rng)
    u = sample_haar_unitary(dim, rng)
    b = (np.eye(dim) + u.conj().T) @ g
    rho = b @ b.conj().T
    return _as_density(rho / np.trace(rho).real, n_qubits)


def sample_haar_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state vector (normalized complex Gaussian)."""
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def sample_noisy_pure(n_qubits: int, rng: np.random.Generator, weight: float | None = None) -> DensityMatrix:
    """Haar-random pure state mixed with white noise.

    rho = q |psi><psi| + (1 - q) I / 2^n with q ~ U[0, 1] unless ``weight``
    forces a specific mixing value.
    """
    _check_qubits(n_qubits)
    dim = 2 ** n_qubits
    psi = sample_haar_ket(dim, rng)
    q = rng.uniform() if weight is None else float(weight)
    if not 0.0 <= q <= 1.0:
        raise ValueError("weight must lie in [0, 1]")
    rho = q * np.outer(psi, psi.conj()) + (1.0 - q) / dim * np.eye(dim)
    return _as_density(rho, n_qubits)


def werner_state(p: float) -> DensityMatrix:
    """Werner family p |psi-><psi-| + (1 - p)/4 I on two qubits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner parameter {p} outside [0, 1]")
    singlet = named_state("singlet").matrix
    rho = p * singlet + (1.0 - p) / 4.0 * np.eye(4)
    return _as_density(rho, 2)


def _ket(amplitudes, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    for idx, amp in amplitudes:
        v[idx] = amp
    return v


def _pure(ket: np.ndarray, n_qubits: int) -> DensityMatrix:
    return _as_density(np.outer(ket, ket.conj()), n_qubits)


_SQRT2 = np.sqrt(2.0)

_NAMED = {
    # |0> = H, |1> = V
    "bell_phi_plus": lambda: _pure(_ket([(0, 1 / _SQRT2), (3, 1 / _SQRT2)], 4), 2),
    "bell_phi_minus": lambda: _pure(_ket([(0, 1 / _SQRT2), (3, -1 / _SQRT2)], 4), 2),
    "bell_psi_plus": lambda: _pure(_ket([(1, 1 / _SQRT2), (2, 1 / _SQRT2)], 4), 2),
    # (|HV> - |VH>)/sqrt(2), the antisymmetric two-qubit state
    "singlet": lambda: _pure(_ket([(1, 1 / _SQRT2), (2, -1 / _SQRT2)], 4), 2),
    "product_hh": lambda: _pure(_ket([(0, 1.0)], 4), 2),
    "product_hv": lambda: _pure(_ket([(1, 1.0)], 4), 2),
    "maximally_mixed_2q": lambda: _as_density(np.eye(4) / 4.0, 2),
    "ghz": lambda: _pure(_ket([(0, 1 / _SQRT2), (7, 1 / _SQRT2)], 8), 3),
    "w": lambda: _pure(_ket([(1, 1 / np.sqrt(3)), (2, 1 / np.sqrt(3)), (4, 1 / np.sqrt(3))], 8), 3),
    "product_hhh": lambda: _pure(_ket([(0, 1.0)], 8), 3),
    "maximally_mixed_3q": lambda: _as_density(np.eye(8) / 8.0, 3),
}


def named_state(name: str) -> DensityMatrix:
    """Exact textbook state by name; see ``named_state.names`` for choices."""
    try:
        factory = _NAMED[name]
    except KeyError:
        raise ValueError(f"unknown state name {name!r}; known: {sorted(_NAMED)}") from None
    return factory()


named_state.names = tuple(sorted(_NAMED))


def _check_qubits(n_qubits: int) -> None:
    if n_qubits not in (2, 3):
        raise ValueError(f"n_qubits must be 2 or 3, got {n_qubits}")
