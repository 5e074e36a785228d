"""qcorr: two- and three-qubit quantum-correlation estimation from
(possibly incomplete) local projective measurements.

Three estimators share one toolkit: iterative maximum-likelihood state
reconstruction with Gram renormalization for incomplete projector sets,
measurement-specific neural regressors, and a measurement-independent
convolutional regressor that accepts arbitrary projector subsets.
"""

from . import estimators, linalg, maxlik, measurement, measures, neural, states
from .measures import CorrelationTarget, concurrence, mutual_information_matrix, von_neumann_entropy
from .measurement import ProbabilityRecord, ProjectorSet, born_probabilities, pauli_projectors
from .states import DensityMatrix, named_state, sample_bures_state, sample_noisy_pure, werner_state

__version__ = "0.1.0"

__all__ = [
    "CorrelationTarget",
    "DensityMatrix",
    "ProbabilityRecord",
    "ProjectorSet",
    "born_probabilities",
    "concurrence",
    "estimators",
    "linalg",
    "maxlik",
    "measurement",
    "measures",
    "mutual_information_matrix",
    "named_state",
    "neural",
    "pauli_projectors",
    "sample_bures_state",
    "sample_noisy_pure",
    "states",
    "von_neumann_entropy",
    "werner_state",
]
