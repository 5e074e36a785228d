import numpy as np
import pytest

from qcorr import states
from qcorr.seeding import child_rng, make_rng


def assert_valid_density(dm, n_qubits):
    assert dm.n_qubits == n_qubits
    assert dm.matrix.shape == (2 ** n_qubits, 2 ** n_qubits)
    assert np.linalg.norm(dm.matrix - dm.matrix.conj().T) < 1e-10
    assert abs(np.trace(dm.matrix).real - 1.0) < 1e-10
    assert np.linalg.eigvalsh(dm.matrix).min() > -1e-10


class TestGinibre:
    def test_shape_and_moments(self):
        rng = make_rng(42)
        n_draws = 2000  # 2000 matrices x 16 entries ~ 3.2e4 samples per part
        samples = np.stack([states.sample_ginibre(4, rng) for _ in range(n_draws)])
        assert samples.shape == (n_draws, 4, 4)
        re = samples.real.ravel()
        im = samples.imag.ravel()
        n = re.size
        assert abs(re.mean()) < 4.0 / np.sqrt(n)
        assert abs(im.mean()) < 4.0 / np.sqrt(n)
        assert abs(re.var() - 1.0) < 0.05
        assert abs(im.var() - 1.0) < 0.05

    def test_seeded_determinism(self):
        a = states.sample_ginibre(4, make_rng(7))
        b = states.sample_ginibre(4, make_rng(7))
        assert np.array_equal(a, b)


class TestHaarUnitary:
    def test_unitarity(self):
        u = states.sample_haar_unitary(4, make_rng(1))
        assert np.linalg.norm(u.conj().T @ u - np.eye(4)) < 1e-10
        assert abs(abs(np.linalg.det(u)) - 1.0) < 1e-10

    def test_first_entry_moment(self):
        # Haar columns are uniform on the sphere: E|U_00|^2 = 1/dim.
        rng = make_rng(3)
        vals = [abs(states.sample_haar_unitary(4, rng)[0, 0]) ** 2 for _ in range(20000)]
        assert abs(np.mean(vals) - 0.25) < 0.25 * 0.05

    def test_left_invariance_moment(self):
        # multiplying by a fixed unitary should not change |entry|^2 statistics
        rng = make_rng(5)
        fixed = states.sample_haar_unitary(4, make_rng(99))
        vals = [abs((fixed @ states.sample_haar_unitary(4, rng))[0, 0]) ** 2 for _ in range(20000)]
        assert abs(np.mean(vals) - 0.25) < 0.25 * 0.05


class TestBures:
    @pytest.mark.parametrize("n_qubits", [2, 3])
    def test_valid_density(self, n_qubits):
        rng = make_rng(11)
        for _ in range(200):
            dm = states.sample_bures_state(n_qubits, rng)
            assert abs(np.trace(dm.matrix).real - 1.0) < 1e-12
            assert_valid_density(dm, n_qubits)

    def test_purity_distribution_matches_independent_sampler(self):
        # Independent oracle: literal transcription of the construction using
        # scipy's Haar sampler, compared via the two-sample KS statistic.
        from scipy.stats import ks_2samp, unitary_group

        n = 10000
        rng = make_rng(123)
        ours = np.array([states.sample_bures_state(2, rng).purity() for _ in range(n)])

        nprng = np.random.default_rng(456)
        theirs = np.empty(n)
        eye = np.eye(4)
        ug = unitary_group
        ug.random_state = np.random.RandomState(789)
        for i in range(n):
            g = nprng.standard_normal((4, 4)) + 1j * nprng.standard_normal((4, 4))
            u = ug.rvs(4)
            m = (eye + u.conj().T) @ g @ g.conj().T @ (eye + u)
            rho = m / np.trace(m).real
            theirs[i] = np.trace(rho @ rho).real
        stat = ks_2samp(ours, theirs).statistic
        assert stat < 0.02


class TestNoisyPure:
    def test_pure_limit(self):
        dm = states.sample_noisy_pure(2, make_rng(0), weight=1.0)
        assert abs(dm.purity() - 1.0) < 1e-12

    def test_mixed_limit(self):
        dm = states.sample_noisy_pure(2, make_rng(0), weight=0.0)
        assert np.allclose(np.linalg.eigvalsh(dm.matrix), 0.25)

    @pytest.mark.parametrize("q", [0.2, 0.5, 0.9])
    def test_forced_weight_spectrum(self, q):
        # spectrum is q + (1-q)/2^n once and (1-q)/2^n with multiplicity 2^n - 1
        dm = states.sample_noisy_pure(2, make_rng(4), weight=q)
        w = np.sort(np.linalg.eigvalsh(dm.matrix))
        expect = np.array([(1 - q) / 4] * 3 + [q + (1 - q) / 4])
        assert np.allclose(w, expect, atol=1e-12)

    @pytest.mark.parametrize("n_qubits", [2, 3])
    def test_valid_density(self, n_qubits):
        rng = make_rng(21)
        for _ in range(200):
            assert_valid_density(states.sample_noisy_pure(n_qubits, rng), n_qubits)


class TestWerner:
    def test_p_zero_is_maximally_mixed(self):
        assert np.allclose(states.werner_state(0.0).matrix, np.eye(4) / 4)

    def test_p_one_is_pure_singlet(self):
        dm = states.werner_state(1.0)
        assert abs(dm.purity() - 1.0) < 1e-12
        assert np.allclose(dm.matrix, states.named_state("singlet").matrix)

    def test_half_spectrum(self):
        w = np.sort(np.linalg.eigvalsh(states.werner_state(0.5).matrix))[::-1]
        assert np.allclose(w, [0.625, 0.125, 0.125, 0.125], atol=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            states.werner_state(1.5)


class TestNamedStates:
    def test_singlet(self):
        ket = np.array([0, 1, -1, 0]) / np.sqrt(2)
        assert np.allclose(states.named_state("singlet").matrix, np.outer(ket, ket.conj()))

    def test_ghz(self):
        ket = np.zeros(8)
        ket[0] = ket[7] = 1 / np.sqrt(2)
        assert np.allclose(states.named_state("ghz").matrix, np.outer(ket, ket))

    def test_product_hh(self):
        m = np.zeros((4, 4))
        m[0, 0] = 1.0
        assert np.allclose(states.named_state("product_hh").matrix, m)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            states.named_state("not_a_state")


class TestSeeding:
    def test_child_streams_disjoint(self):
        a = child_rng(1, "x").standard_normal(4)
        b = child_rng(1, "y").standard_normal(4)
        assert not np.allclose(a, b)

    def test_child_streams_reproducible(self):
        a = child_rng(1, "x", 2).standard_normal(4)
        b = child_rng(1, "x", 2).standard_normal(4)
        assert np.array_equal(a, b)

    def test_whole_ensemble_reproducible(self):
        r1, r2 = make_rng(99), make_rng(99)
        e1 = [states.sample_bures_state(2, r1).matrix for _ in range(50)]
        e2 = [states.sample_bures_state(2, r2).matrix for _ in range(50)]
        assert all(np.array_equal(a, b) for a, b in zip(e1, e2))
