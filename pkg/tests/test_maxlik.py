import numpy as np
import pytest

from qcorr import linalg
from qcorr.errors import UninformativeMeasurementError
from qcorr.maxlik import MaxLikConfig, MaxLikResult, r_operator, reconstruct
from qcorr.measurement import (
    KIND_EXACT_BORN,
    ProbabilityRecord,
    born_probabilities,
    pauli_projectors,
    random_subset,
    simulate_counts,
)
from qcorr.measures import concurrence
from qcorr.seeding import make_rng
from qcorr.states import named_state, sample_bures_state


def trace_distance(a, b):
    w = linalg.hermitian_eigenvalues(a - b)
    return 0.5 * float(np.abs(w).sum())


class TestROperator:
    def test_exact_full_set_gives_gram(self, rng):
        pset = pauli_projectors(2)
        dm = sample_bures_state(2, rng)
        freqs = born_probabilities(dm, pset)
        r = r_operator(dm, pset, freqs)
        assert np.allclose(r, 9 * np.eye(4), atol=1e-9)

    def test_single_frequency_gives_projector(self):
        pset = pauli_projectors(2)
        values = np.zeros(36)
        values[5] = 1.0
        freqs = ProbabilityRecord(values=values, kind=KIND_EXACT_BORN, active_mask=np.ones(36, bool))
        dm = named_state("maximally_mixed_2q")
        r = r_operator(dm, pset, freqs)
        # f_i = 0 terms contribute nothing, so R is proportional to M_5
        assert np.allclose(r, pset.projectors[5] / 0.25, atol=1e-12)

    def test_hermitian(self, rng):
        pset = pauli_projectors(2)
        dm = sample_bures_state(2, rng)
        freqs = simulate_counts(born_probabilities(dm, pset), 100, rng)
        r = r_operator(dm, pset, freqs)
        assert np.linalg.norm(r - r.conj().T) < 1e-12 * max(1.0, np.linalg.norm(r))


class TestReconstruct:
    def test_uniform_frequencies_fixed_point(self):
        pset = pauli_projectors(2)
        freqs = ProbabilityRecord(
            values=np.full(36, 0.25), kind=KIND_EXACT_BORN, active_mask=np.ones(36, bool)
        )
        res = reconstruct(freqs, pset)
        assert res.converged
        assert res.iterations_used == 1
        assert np.allclose(res.estimate.matrix, np.eye(4) / 4, atol=1e-12)

    def test_complete_data_recovers_truth(self):
        # linear convergence: ~1e-4 at 2k iterations, <1e-6 by 10k (measured;
        # the map has no acceleration, so small-eigenvalue states are slow)
        rng = make_rng(55)
        pset = pauli_projectors(2)
        for _ in range(3):
            dm = sample_bures_state(2, rng)
            freqs = born_probabilities(dm, pset)
            res = reconstruct(freqs, pset, MaxLikConfig(max_iterations=10000, convergence_tol=1e-12))
            assert trace_distance(res.estimate.matrix, dm.matrix) < 1e-6

    def test_complete_data_concurrence_error(self, rng):
        pset = pauli_projectors(2)
        errs = []
        for _ in range(10):
            dm = sample_bures_state(2, rng)
            freqs = born_probabilities(dm, pset)
            res = reconstruct(freqs, pset, MaxLikConfig(max_iterations=1000, convergence_tol=1e-10))
            errs.append(abs(concurrence(res.estimate) - concurrence(dm)))
        assert np.mean(errs) <= 1e-3

    def test_incomplete_subset_converges_to_valid_state(self, rng):
        pset = pauli_projectors(2)
        dm = sample_bures_state(2, rng)
        sub = random_subset(pset, 20, rng)
        freqs = born_probabilities(dm, sub)
        res = reconstruct(freqs, sub)
        assert isinstance(res, MaxLikResult)
        assert res.converged
        res.estimate.validate()

    def test_monotone_likelihood_complete_set(self):
        # exact property of the R rho R map when the gram operator is
        # proportional to the identity; holds for exact and noisy data
        rng = make_rng(77)
        pset = pauli_projectors(2)
        for i in range(20):
            dm = sample_bures_state(2, rng)
            freqs = born_probabilities(dm, pset)
            if i % 2 == 0:
                freqs = simulate_counts(freqs, 300, rng)
            res = reconstruct(freqs, pset, MaxLikConfig(max_iterations=300, convergence_tol=1e-12))
            ll = res.log_likelihoods
            slack = 1e-12 * (1 + np.abs(ll[:-1]))
            assert np.all(np.diff(ll) >= -slack)

    def test_iterates_stay_physical(self, rng):
        # any iteration cutoff is an iterate; all must be unit-trace PSD
        pset = pauli_projectors(2)
        dm = sample_bures_state(2, rng)
        sub = random_subset(pset, 22, rng)
        freqs = simulate_counts(born_probabilities(dm, sub), 400, rng)
        for cutoff in (1, 2, 3, 7, 20, 80):
            res = reconstruct(freqs, sub, MaxLikConfig(max_iterations=cutoff, convergence_tol=1e-15))
            m = res.estimate.matrix
            assert abs(np.trace(m).real - 1.0) < 1e-12
            assert linalg.hermitian_eigenvalues(m)[-1] >= -1e-10

    def test_singular_gram_rejected(self):
        pset = pauli_projectors(2)
        mask = np.zeros(36, dtype=bool)
        mask[0] = True
        sub = pset.with_mask(mask)
        values = np.zeros(36)
        values[0] = 1.0
        freqs = ProbabilityRecord(values=values, kind=KIND_EXACT_BORN, active_mask=mask)
        with pytest.raises(UninformativeMeasurementError):
            reconstruct(freqs, sub)

    def test_explicit_init(self, rng):
        pset = pauli_projectors(2)
        dm = sample_bures_state(2, rng)
        freqs = born_probabilities(dm, pset)
        res = reconstruct(freqs, pset, MaxLikConfig(max_iterations=50, init=dm))
        # starting at the truth, iterates stay there
        assert trace_distance(res.estimate.matrix, dm.matrix) < 1e-8

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MaxLikConfig(max_iterations=0)
        with pytest.raises(ValueError):
            MaxLikConfig(convergence_tol=0.0)
