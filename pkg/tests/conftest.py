import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2.0


def random_density(rng, n_qubits):
    from qcorr.states import sample_bures_state

    return sample_bures_state(n_qubits, rng)
