"""Dense complex linear algebra for few-qubit operators.

Everything here works on plain ``numpy`` complex arrays with row-major entry
semantics and computational-basis ordering (|0...0> first). The Hermitian
eigensolver is a cyclic Jacobi iteration: for the dimensions that occur in
this package (at most 8, i.e. three qubits) it is deterministic, accurate to
machine precision, and has no tuning knobs.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import NegativeEigenvalueError, NonHermitianError

HERMITICITY_TOL = 1e-10

# Jacobi stops when the off-diagonal Frobenius norm drops below this times
# the matrix norm (or stalls at the float64 floor).
_JACOBI_TOL = 1e-14
_MAX_SWEEPS = 64

# Eigenvalues of a PSD matrix below this fraction of the largest one are
# rounding noise; square-rooting them would turn an O(eps) error into an
# O(sqrt(eps)) one, so they are treated as exact zeros.
RELATIVE_PSD_FLOOR = 1e-12


@dataclass(frozen=True)
class HermitianEig:
    """Spectral decomposition of a Hermitian matrix.

    ``eigenvalues`` are real and sorted in decreasing order; the columns of
    ``eigenvectors`` are the matching orthonormal eigenvectors, so that
    ``V @ diag(w) @ V.conj().T`` reconstructs the input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a) -> np.ndarray:
    """Coerce input to a 2-D complex128 array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m.view(np.float64))):
        raise ValueError("matrix contains non-finite entries")
    return m


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product a (x) b."""
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def hermitian_deviation(h: np.ndarray) -> float:
    """Largest entrywise deviation from Hermiticity, relative to scale."""
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    return float(np.max(np.abs(h - dagger(h)))) / scale if h.size else 0.0


def require_hermitian(h: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    dev = hermitian_deviation(h)
    if dev > tol:
        raise NonHermitianError(f"matrix deviates from Hermiticity by {dev:.3e} (tol {tol:.1e})")
    return h


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Zero the (p, q) off-diagonal pair of Hermitian ``a`` in place,
    accumulating the rotation into ``v``."""
    apq = a[p, q]
    absq = abs(apq)
    phase = apq / absq
    app = a[p, p].real
    aqq = a[q, q].real
    tau = (aqq - app) / (2.0 * absq)
    if tau == 0.0:
        t = 1.0
    else:
        t = -np.sign(tau) / (abs(tau) + np.hypot(1.0, tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    # A <- J^dag A J with J = [[c, -s*phase], [s*conj(phase), c]] on (p, q).
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p + (s * np.conj(phase)) * col_q
    a[:, q] = (-s * phase) * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p + (s * phase) * row_q
    a[q, :] = (-s * np.conj(phase)) * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real

    v_p = v[:, p].copy()
    v_q = v[:, q].copy()
    v[:, p] = c * v_p + (s * np.conj(phase)) * v_q
    v[:, q] = (-s * phase) * v_p + c * v_q


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(h) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Raises :class:`NonHermitianError` if the input is not Hermitian within
    ``HERMITICITY_TOL`` (relative to the largest entry).
    """
    m = as_matrix(h)
    n, nc = m.shape
    if n != nc:
        raise ValueError(f"expected a square matrix, got {m.shape}")
    require_hermitian(m)

    a = m.copy()
    v = np.eye(n, dtype=np.complex128)
    tol = _JACOBI_TOL * float(np.linalg.norm(a))
    skip = tol / max(n, 1)
    previous_off = np.inf
    for _ in range(_MAX_SWEEPS):
        off = _off_diagonal_norm(a)
        if off <= tol or off >= 0.9 * previous_off:  # converged or stalled at the float64 floor
            break
        previous_off = off
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > skip:
                    _jacobi_rotate(a, v, p, q)

    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return HermitianEig(eigenvalues=w[order], eigenvectors=np.ascontiguousarray(v[:, order]))


def hermitian_eigenvalues(h) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, sorted in decreasing order."""
    return hermitian_eig(h).eigenvalues


def psd_spectrum(p) -> HermitianEig:
    """Eigendecomposition of a PSD matrix with the noise policy applied:
    eigenvalues in [-1e-10, 0) and entries below ``RELATIVE_PSD_FLOOR`` of
    the largest one are clipped to zero; anything below -1e-8 raises
    :class:`NegativeEigenvalueError`."""
    eig = hermitian_eig(p)
    w = eig.eigenvalues.copy()
    if w.size and w[-1] < -1e-8:
        raise NegativeEigenvalueError(f"matrix has eigenvalue {w[-1]:.3e} < -1e-8, not PSD")
    w = np.clip(w, 0.0, None)
    if w.size and w[0] > 0.0:
        w[w < RELATIVE_PSD_FLOOR * w[0]] = 0.0
    return HermitianEig(eigenvalues=w, eigenvectors=eig.eigenvectors)


def matrix_sqrt_psd(p) -> np.ndarray:
    """Hermitian square root of a positive-semidefinite matrix, with the
    :func:`psd_spectrum` rounding-noise policy."""
    eig = psd_spectrum(p)
    v = eig.eigenvectors
    s = (v * np.sqrt(eig.eigenvalues)) @ dagger(v)
    return (s + dagger(s)) / 2.0


def partial_trace(rho, dims, keep) -> np.ndarray:
    """Trace out all subsystems not listed in ``keep``.

    ``dims`` lists the local dimensions in tensor order; ``keep`` is a
    nonempty collection of subsystem indices to retain (original order is
    preserved in the output). The trace of the input is preserved.
    """
    m = as_matrix(rho)
    dims = [int(d) for d in dims]
    total = prod(dims)
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")

    # Row index j gets label j; column index j reuses label j when traced
    # out (contraction) and gets a fresh label n + j when kept.
    row_labels = list(range(n))
    col_labels = [n + j if j in keep else j for j in range(n)]
    out_labels = [j for j in keep] + [n + j for j in keep]
    reduced = np.einsum(m.reshape(dims + dims), row_labels + col_labels, out_labels)
    d_keep = prod(dims[j] for j in keep)
    return reduced.reshape(d_keep, d_keep)
