"""Quantum-correlation quantifiers: concurrence, entropy, mutual information.

Two concurrence routes are provided. The production path takes the square
roots of the spectrum of sqrt(rho) rho_tilde sqrt(rho) (one matrix square
root); the cross-check path builds the matrix T = sqrt(sqrt(rho) rho_tilde
sqrt(rho)) explicitly and reads off its spectrum (two square roots). Both
must agree to 1e-9 on valid states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .states import PAULI_Y, DensityMatrix

KIND_CONCURRENCE = "concurrence"
KIND_MUTUAL_INFO_2Q = "mutual_info_2q"
KIND_MUTUAL_INFO_3Q = "mutual_info_3q"

# Off-diagonal entries of the 3-qubit mutual-information matrix, in order.
PAIR_ORDER_3Q = ((0, 1), (0, 2), (1, 2))

_SPIN_FLIP = np.kron(PAULI_Y, PAULI_Y)

@dataclass(frozen=True)
class CorrelationTarget:
    """Scalar concurrence, scalar 2-qubit mutual information, or the ordered
    (I_AB, I_AC, I_BC) vector for three qubits."""

    kind: str
    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=np.float64))
        expected = target_width(self.kind)
        if v.shape != (expected,):
            raise ValueError(f"{self.kind} target must have {expected} entries, got {v.shape}")
        object.__setattr__(self, "values", v)


def target_width(kind: str) -> int:
    widths = {KIND_CONCURRENCE: 1, KIND_MUTUAL_INFO_2Q: 1, KIND_MUTUAL_INFO_3Q: 3}
    try:
        return widths[kind]
    except KeyError:
        raise ValueError(f"unknown target kind {kind!r}") from None


def _spin_flipped(rho: np.ndarray) -> np.ndarray:
    return _SPIN_FLIP @ rho.conj() @ _SPIN_FLIP


def _concurrence_spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues of sqrt(rho) rho_tilde sqrt(rho), descending, with the
    shared PSD rounding-noise floor (keeps both concurrence routes
    consistent on rank-deficient states)."""
    a = linalg.matrix_sqrt_psd(rho)
    h = a @ _spin_flipped(rho) @ a
    return linalg.psd_spectrum((h + h.conj().T) / 2.0).eigenvalues


def concurrence(rho: DensityMatrix) -> float:
    """Two-qubit concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the decreasingly sorted square roots of the spectrum of
    sqrt(rho) rho_tilde sqrt(rho), i.e. the eigenvalues of the non-Hermitian
    product rho rho_tilde.
    """
    _require_two_qubits(rho)
    lam = np.sqrt(_concurrence_spectrum(rho.matrix))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_matrix_sqrt_route(rho: DensityMatrix) -> float:
    """Cross-check concurrence via the explicit matrix T = sqrt(sqrt(rho)
    rho_tilde sqrt(rho)) and its spectrum."""
    _require_two_qubits(rho)
    a = linalg.matrix_sqrt_psd(rho.matrix)
    t = linalg.matrix_sqrt_psd(a @ _spin_flipped(rho.matrix) @ a)
    lam = linalg.hermitian_eigenvalues(t)
    lam = np.clip(lam, 0.0, None)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def von_neumann_entropy(rho, log_base: int = 2) -> float:
    """-Tr(rho log_d rho) with 0 log 0 := 0.

    Accepts a DensityMatrix or a raw PSD matrix; eigenvalues below 1e-14 are
    treated as exact zeros.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else linalg.as_matrix(rho)
    w = linalg.hermitian_eigenvalues(m)
    w = w[w > 1e-14]
    if w.size == 0:
        return 0.0
    return float(-np.sum(w * np.log(w)) / np.log(log_base))


def mutual_information(rho_joint: np.ndarray, dims, i: int, j: int) -> float:
    """Symmetrized mutual information (S_i + S_j - S_ij) / 2 of two
    subsystems of a joint state given as a raw matrix."""
    s_i = von_neumann_entropy(linalg.partial_trace(rho_joint, dims, [i]))
    s_j = von_neumann_entropy(linalg.partial_trace(rho_joint, dims, [j]))
    s_ij = von_neumann_entropy(linalg.partial_trace(rho_joint, dims, [i, j]))
    return 0.5 * (s_i + s_j - s_ij)


def mutual_information_matrix(rho: DensityMatrix) -> CorrelationTarget:
    """Mutual information of a 2-qubit state, or the ordered off-diagonal
    vector (I_AB, I_AC, I_BC) for three qubits."""
    dims = [2] * rho.n_qubits
    if rho.n_qubits == 2:
        s_a = von_neumann_entropy(rho.reduced([0]))
        s_b = von_neumann_entropy(rho.reduced([1]))
        s_ab = von_neumann_entropy(rho)
        value = 0.5 * (s_a + s_b - s_ab)
        return CorrelationTarget(kind=KIND_MUTUAL_INFO_2Q, values=np.array([value]))
    if rho.n_qubits == 3:
        values = [mutual_information(rho.matrix, dims, i, j) for i, j in PAIR_ORDER_3Q]
        return CorrelationTarget(kind=KIND_MUTUAL_INFO_3Q, values=np.array(values))
    raise ValueError(f"unsupported qubit count {rho.n_qubits}")


def correlation_target(rho: DensityMatrix, kind: str) -> CorrelationTarget:
    """Dispatch a state to the requested correlation quantifier."""
    if kind == KIND_CONCURRENCE:
        return CorrelationTarget(kind=kind, values=np.array([concurrence(rho)]))
    if kind in (KIND_MUTUAL_INFO_2Q, KIND_MUTUAL_INFO_3Q):
        target = mutual_information_matrix(rho)
        if target.kind != kind:
            raise ValueError(f"state has {rho.n_qubits} qubits, incompatible with {kind}")
        return target
    raise ValueError(f"unknown target kind {kind!r}")


def _require_two_qubits(rho: DensityMatrix) -> None:
    if not isinstance(rho, DensityMatrix) or rho.n_qubits != 2:
        raise ValueError("concurrence is defined here for 2-qubit DensityMatrix inputs")
