import numpy as np
import pytest

from qcorr import linalg
from qcorr.errors import NegativeEigenvalueError, NonHermitianError
from qcorr.states import PAULI_X, PAULI_Z

from conftest import random_hermitian


class TestTensorProduct:
    def test_identity_case(self):
        out = linalg.tensor_product(np.eye(2), np.eye(2))
        assert np.array_equal(out, np.eye(4))

    def test_diagonal_case(self):
        out = linalg.tensor_product(PAULI_Z, PAULI_Z)
        assert np.allclose(out, np.diag([1, -1, -1, 1]))

    def test_mixed_product_identity(self, rng):
        # (A (x) B)(C (x) D) = (AC) (x) (BD), checked by direct multiplication
        for _ in range(10):
            a, b, c, d = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(4))
            lhs = linalg.tensor_product(a, b) @ linalg.tensor_product(c, d)
            rhs = linalg.tensor_product(a @ c, b @ d)
            assert np.allclose(lhs, rhs, atol=1e-12)


class TestHermitianEig:
    def test_identity(self):
        eig = linalg.hermitian_eig(np.eye(4))
        assert np.allclose(eig.eigenvalues, np.ones(4))

    def test_pauli_x(self):
        eig = linalg.hermitian_eig(PAULI_X)
        assert np.allclose(eig.eigenvalues, [1.0, -1.0])

    def test_reconstruction_residual(self, rng):
        for n in (2, 3, 4, 5, 8):
            for _ in range(20):
                h = random_hermitian(rng, n)
                eig = linalg.hermitian_eig(h)
                v, w = eig.eigenvectors, eig.eigenvalues
                residual = np.linalg.norm(v @ np.diag(w) @ v.conj().T - h) / np.linalg.norm(h)
                assert residual < 1e-10
                assert np.linalg.norm(v.conj().T @ v - np.eye(n)) < 1e-10

    def test_sorted_descending(self, rng):
        w = linalg.hermitian_eig(random_hermitian(rng, 8)).eigenvalues
        assert np.all(np.diff(w) <= 0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            linalg.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            linalg.hermitian_eig(np.zeros((2, 3)))

    def test_matches_lapack(self, rng):
        for _ in range(10):
            h = random_hermitian(rng, 6)
            ours = linalg.hermitian_eig(h).eigenvalues
            ref = np.sort(np.linalg.eigvalsh(h))[::-1]
            assert np.allclose(ours, ref, atol=1e-11)


class TestMatrixSqrtPsd:
    def test_identity(self):
        assert np.allclose(linalg.matrix_sqrt_psd(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        out = linalg.matrix_sqrt_psd(np.diag([4.0, 9.0]))
        assert np.allclose(out, np.diag([2.0, 3.0]))

    def test_squaring_oracle(self, rng):
        for _ in range(20):
            a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            p = a @ a.conj().T
            s = linalg.matrix_sqrt_psd(p)
            assert np.linalg.norm(s @ s - p) < 1e-9 * max(1.0, np.linalg.norm(p))
            assert np.linalg.norm(s - s.conj().T) < 1e-12 * max(1.0, np.linalg.norm(p))

    def test_commutes_with_input(self, rng):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        p = a @ a.conj().T
        s = linalg.matrix_sqrt_psd(p)
        assert np.linalg.norm(s @ p - p @ s) < 1e-9 * np.linalg.norm(p)

    def test_clips_rounding_noise(self):
        p = np.diag([1.0, -5e-11])
        s = linalg.matrix_sqrt_psd(p)
        assert np.allclose(s, np.diag([1.0, 0.0]))

    def test_rejects_negative(self):
        with pytest.raises(NegativeEigenvalueError):
            linalg.matrix_sqrt_psd(np.diag([1.0, -1e-6]))


class TestPartialTrace:
    def test_bell_state_reduction(self):
        bell = np.zeros((4, 4), dtype=complex)
        ket = np.array([1, 0, 0, 1]) / np.sqrt(2)
        bell = np.outer(ket, ket.conj())
        reduced = linalg.partial_trace(bell, [2, 2], [0])
        assert np.allclose(reduced, np.eye(2) / 2)

    def test_product_state(self, rng):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        rho_a = a @ a.conj().T
        rho_a /= np.trace(rho_a)
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        rho_b = b @ b.conj().T
        rho_b /= np.trace(rho_b)
        joint = linalg.tensor_product(rho_a, rho_b)
        assert np.allclose(linalg.partial_trace(joint, [2, 2], [0]), rho_a, atol=1e-12)
        assert np.allclose(linalg.partial_trace(joint, [2, 2], [1]), rho_b, atol=1e-12)

    def test_trace_preserved(self, rng):
        a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        for keep in ([0], [1], [2], [0, 1], [0, 2], [1, 2]):
            reduced = linalg.partial_trace(rho, [2, 2, 2], keep)
            assert abs(np.trace(reduced) - 1.0) < 1e-12

    def test_sequential_tracing_order_independent(self, rng):
        a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        direct = linalg.partial_trace(rho, [2, 2, 2], [1])
        via_01 = linalg.partial_trace(linalg.partial_trace(rho, [2, 2, 2], [0, 1]), [2, 2], [1])
        via_12 = linalg.partial_trace(linalg.partial_trace(rho, [2, 2, 2], [1, 2]), [2, 2], [0])
        assert np.allclose(direct, via_01, atol=1e-12)
        assert np.allclose(direct, via_12, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            linalg.partial_trace(np.eye(4), [2, 2, 2], [0])
        with pytest.raises(ValueError):
            linalg.partial_trace(np.eye(8), [2, 2, 2], [])
