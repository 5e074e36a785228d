"""Maximum-likelihood state reconstruction from projective measurement data.

The estimator is the fixed point of the iteration

    rho <- mu_k G^{-1/2} R rho R G^{-1/2},   R = sum_i (f_i / p_i) M_i,

with p_i = Tr(rho M_i), G = sum_i M_i, and mu_k restoring unit trace. The
G^{-1/2} correction renormalizes incomplete projector subsets to a
resolution of the identity; for a complete set G is proportional to the
identity and the map reduces to the plain R rho R iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .measurement import ProbabilityRecord, ProjectorSet, gram_inverse_sqrt, gram_operator
from .states import DensityMatrix

# Born probabilities below this floor are clamped inside R; heavily
# undersampled data can otherwise divide by zero.
PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class MaxLikConfig:
    max_iterations: int = 1000
    convergence_tol: float = 1e-10  # trace distance between successive iterates
    init: DensityMatrix | None = None  # None -> maximally mixed

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")


@dataclass(frozen=True)
class MaxLikResult:
    estimate: DensityMatrix
    iterations_used: int
    final_log_likelihood: float
    converged: bool
    log_likelihoods: np.ndarray = field(repr=False, default=None)


def r_operator(rho: DensityMatrix, pset: ProjectorSet, freqs: ProbabilityRecord) -> np.ndarray:
    """R = sum over active projectors of (f_i / p_i) M_i.

    Terms with f_i = 0 contribute nothing; p_i is floored at 1e-12.
    """
    active = pset.active_projectors()
    f = freqs.values[pset.active_mask]
    return _r_operator_raw(rho.matrix, active, f)


def _r_operator_raw(rho_mat: np.ndarray, projectors: np.ndarray, f: np.ndarray) -> np.ndarray:
    p = np.einsum("kij,ji->k", projectors, rho_mat).real
    p = np.maximum(p, PROBABILITY_FLOOR)
    weights = np.where(f != 0.0, f / p, 0.0)
    r = np.einsum("k,kij->ij", weights, projectors)
    return (r + r.conj().T) / 2.0


def log_likelihood(rho: DensityMatrix, pset: ProjectorSet, freqs: ProbabilityRecord) -> float:
    """sum_i f_i log p_i over active projectors (natural log, floored p)."""
    p = np.einsum("kij,ji->k", pset.active_projectors(), rho.matrix).real
    return _log_likelihood_raw(p, freqs.values[pset.active_mask])


def _log_likelihood_raw(p: np.ndarray, f: np.ndarray) -> float:
    p = np.maximum(p, PROBABILITY_FLOOR)
    mask = f > 0.0
    return float(np.sum(f[mask] * np.log(p[mask])))


def _trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    w = linalg.hermitian_eigenvalues(a - b)
    return 0.5 * float(np.sum(np.abs(w)))


def reconstruct(
    freqs: ProbabilityRecord, pset: ProjectorSet, cfg: MaxLikConfig | None = None
) -> MaxLikResult:
    """Run the G-corrected R rho R iteration until the trace distance
    between successive iterates falls below ``cfg.convergence_tol`` or the
    iteration budget is spent.

    Raises :class:`UninformativeMeasurementError` when the active subset has
    a singular Gram operator.
    """
    cfg = cfg or MaxLikConfig()
    if freqs.values.shape[0] != pset.full_size:
        raise ValueError("frequency record is not aligned with the projector set")
    dim = pset.projectors.shape[1]

    gram = gram_operator(pset)
    g_inv_sqrt = gram_inverse_sqrt(gram)

    projectors = pset.active_projectors()
    f = freqs.values[pset.active_mask]

    if cfg.init is None:
        rho = np.eye(dim, dtype=np.complex128) / dim
    else:
        if cfg.init.dim != dim:
            raise ValueError("initial state dimension does not match the projectors")
        rho = cfg.init.matrix.copy()

    # Cheap Frobenius bound decides when the exact trace distance is worth
    # computing: 0.5 * ||d||_1 <= 0.5 * sqrt(dim) * ||d||_F.
    fro_gate = cfg.convergence_tol / (0.5 * np.sqrt(dim)) * 4.0

    flat = projectors.reshape(projectors.shape[0], dim * dim)
    loglikes = np.empty(cfg.max_iterations, dtype=np.float64)
    iterations = 0
    converged = False
    for _ in range(cfg.max_iterations):
        p = (flat @ rho.T.reshape(dim * dim)).real
        loglikes[iterations] = _log_likelihood_raw(p, f)
        weights = np.where(f != 0.0, f / np.maximum(p, PROBABILITY_FLOOR), 0.0)
        r = (weights @ flat).reshape(dim, dim)
        r = (r + r.conj().T) / 2.0
        rr = r @ rho @ r
        nxt = g_inv_sqrt @ rr @ g_inv_sqrt
        nxt = (nxt + nxt.conj().T) / 2.0
        nxt /= np.trace(nxt).real
        iterations += 1
        delta = nxt - rho
        rho = nxt
        if np.linalg.norm(delta) <= fro_gate and _trace_distance(rho, rho - delta) < cfg.convergence_tol:
            converged = True
            break

    estimate = DensityMatrix(matrix=rho, n_qubits=pset.n_qubits)
    p_final = (flat @ rho.T.reshape(dim * dim)).real
    return MaxLikResult(
        estimate=estimate,
        iterations_used=iterations,
        final_log_likelihood=_log_likelihood_raw(p_final, f),
        converged=converged,
        log_likelihoods=loglikes[:iterations].copy(),
    )
