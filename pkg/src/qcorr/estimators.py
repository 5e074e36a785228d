"""Dataset construction and the two neural estimator pipelines.

Measurement-specific models consume the probabilities of one fixed projector
subset; their input width equals the number of active projectors and they
refuse data from any other subset (guarded by a measurement hash).

The measurement-independent model consumes a fixed-length encoding of the
full canonical set: one slot per projector holding the local Bloch vectors
of its single-qubit factors plus the measured probability, with inactive
slots zeroed. Slot width matches the conv1d kernel and stride, so the first
layer scans whole slots without crosstalk.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import measures
from .errors import MeasurementMismatchError
from .measurement import (
    BASIS_KETS,
    ProbabilityRecord,
    ProjectorSet,
    born_probabilities,
    mask_hash,
)
from .neural import NetworkModel, forward
from .states import PAULI_X, PAULI_Y, PAULI_Z, DensityMatrix, sample_bures_state, sample_noisy_pure

logger = logging.getLogger(__name__)

BURES_FRACTION = 4 / 5   # remainder is Haar-pure states mixed with white noise
TRAIN_FRACTION = 4 / 5   # train : validation = 4 : 1

PIPELINE_SPECIFIC = "specific"
PIPELINE_INDEPENDENT = "independent"


@dataclass(frozen=True)
class TrainingDataset:
    """Aligned (inputs, targets) batch plus provenance metadata."""

    inputs: np.ndarray
    targets: np.ndarray
    meta: dict

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        if inputs.ndim != 2 or targets.ndim != 2 or inputs.shape[0] != targets.shape[0]:
            raise ValueError("inputs and targets must be aligned 2-D batches")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]


def slot_width(n_qubits: int) -> int:
    """Per-projector encoding width: one Bloch vector per qubit plus the
    probability value."""
    return 3 * n_qubits + 1


def _bloch_of_letter(letter: str) -> np.ndarray:
    ket = BASIS_KETS[letter]
    return np.array(
        [np.real(ket.conj() @ (p @ ket)) for p in (PAULI_X, PAULI_Y, PAULI_Z)], dtype=np.float64
    )


def local_bloch_descriptors(pset: ProjectorSet) -> np.ndarray:
    """(full_size, 3 * n_qubits) array of concatenated local Bloch vectors."""
    per_letter = {letter: _bloch_of_letter(letter) for letter in BASIS_KETS}
    rows = [np.concatenate([per_letter[letter] for letter in label]) for label in pset.labels]
    return np.asarray(rows)


def encode_independent_input(pset: ProjectorSet, probs: ProbabilityRecord) -> np.ndarray:
    """Fixed-length measurement-independent input vector.

    One slot per canonical projector: (Bloch descriptors, probability);
    slots of inactive projectors are zero-padded.
    """
    if probs.values.shape[0] != pset.full_size:
        raise ValueError("probability record is not aligned with the projector set")
    mask = probs.active_mask
    return encode_independent_batch(pset, mask[None, :], probs.values[None, :])[0]


def encode_independent_batch(pset: ProjectorSet, masks: np.ndarray, prob_rows: np.ndarray) -> np.ndarray:
    """Vectorized slot encoding for batches of (mask, probability) rows."""
    descriptors = local_bloch_descriptors(pset)
    masks = np.asarray(masks, dtype=bool)
    prob_rows = np.asarray(prob_rows, dtype=np.float64)
    n, full = prob_rows.shape
    width = descriptors.shape[1] + 1
    slots = np.zeros((n, full, width), dtype=np.float64)
    slots[:, :, :-1] = descriptors[None, :, :] * masks[:, :, None]
    slots[:, :, -1] = prob_rows * masks
    return slots.reshape(n, full * width)


def sample_training_states(n_states: int, n_qubits: int, rng: np.random.Generator):
    """Ensemble mix used for training: 4/5 Bures, 1/5 noisy Haar-pure."""
    n_bures = (4 * n_states) // 5
    states = [sample_bures_state(n_qubits, rng) for _ in range(n_bures)]
    states += [sample_noisy_pure(n_qubits, rng) for _ in range(n_states - n_bures)]
    return states


def correlation_targets(states, target_kind: str) -> np.ndarray:
    """Stacked target rows for a list of states."""
    return np.stack([measures.correlation_target(s, target_kind).values for s in states])


def _split(inputs: np.ndarray, targets: np.ndarray, meta: dict, rng: np.random.Generator):
    n = inputs.shape[0]
    order = rng.permutation(n)
    n_train = (4 * n) // 5
    train_idx, val_idx = order[:n_train], order[n_train:]
    train = TrainingDataset(inputs[train_idx], targets[train_idx], {**meta, "split": "train"})
    val = TrainingDataset(inputs[val_idx], targets[val_idx], {**meta, "split": "val"})
    return train, val


def build_training_set(
    n_states: int,
    pset: ProjectorSet,
    target_kind: str,
    rng: np.random.Generator,
    seed=None,
):
    """Measurement-specific dataset: exact Born probabilities of the active
    projectors as inputs, correlation values as targets, shuffled and split
    4:1 into (train, val)."""
    measures.target_width(target_kind)
    _check_kind_compatible(target_kind, pset.n_qubits)
    states = sample_training_states(n_states, pset.n_qubits, rng)
    inputs = np.stack([born_probabilities(s, pset).active_values() for s in states])
    targets = correlation_targets(states, target_kind)
    meta = {
        "pipeline": PIPELINE_SPECIFIC,
        "n_qubits": pset.n_qubits,
        "measurement_hash": pset.measurement_hash(),
        "mask": "".join("1" if on else "0" for on in pset.active_mask),
        "target_kind": target_kind,
        "ensemble": f"bures{BURES_FRACTION:.2f}+noisy{1 - BURES_FRACTION:.2f}",
        "seed": seed,
    }
    return _split(inputs, targets, meta, rng)


def build_independent_training_set(
    n_states: int,
    pset: ProjectorSet,
    target_kind: str,
    rng: np.random.Generator,
    k_range: tuple[int, int] | None = None,
    seed=None,
):
    """Measurement-independent dataset: each sample gets its own uniformly
    drawn projector subset (size uniform over ``k_range``), encoded with
    zero-padded slots."""
    measures.target_width(target_kind)
    _check_kind_compatible(target_kind, pset.n_qubits)
    full = pset.full_size
    k_lo, k_hi = k_range or (max(4, full // 6), full)
    if not 1 <= k_lo <= k_hi <= full:
        raise ValueError(f"bad subset size range ({k_lo}, {k_hi})")

    states = sample_training_states(n_states, pset.n_qubits, rng)
    full_mask_set = pset.with_mask(np.ones(full, dtype=bool))
    prob_rows = np.stack([born_probabilities(s, full_mask_set).values for s in states])
    masks = np.zeros((n_states, full), dtype=bool)
    for i in range(n_states):
        k = int(rng.integers(k_lo, k_hi + 1))
        masks[i, rng.choice(full, size=k, replace=False)] = True
    inputs = encode_independent_batch(pset, masks, prob_rows)
    targets = correlation_targets(states, target_kind)
    meta = {
        "pipeline": PIPELINE_INDEPENDENT,
        "n_qubits": pset.n_qubits,
        "target_kind": target_kind,
        "subset_sizes": [k_lo, k_hi],
        "ensemble": f"bures{BURES_FRACTION:.2f}+noisy{1 - BURES_FRACTION:.2f}",
        "seed": seed,
    }
    return _split(inputs, targets, meta, rng)


def predict_batch(model: NetworkModel, inputs: np.ndarray) -> np.ndarray:
    """Forward pass with predictions clamped to the target range [0, 1].

    Models train with a linear output head (a sigmoid head saturates on the
    boundary-value targets), so the clamp enforces the target bounds.
    """
    out = forward(model, inputs)
    return np.clip(out, 0.0, 1.0)


def predict_specific(model: NetworkModel, probs: ProbabilityRecord) -> measures.CorrelationTarget:
    """Prediction from a measurement-specific model.

    The record's active subset must match the subset the model was trained
    for; mismatches raise instead of silently truncating.
    """
    expected_hash = model.meta.get("measurement_hash")
    record_hash = mask_hash(model.meta.get("n_qubits"), probs.active_mask)
    if expected_hash is None or model.meta.get("pipeline") != PIPELINE_SPECIFIC:
        raise MeasurementMismatchError("model does not carry measurement-specific metadata")
    if record_hash != expected_hash:
        raise MeasurementMismatchError(
            f"record measurement hash {record_hash} does not match model {expected_hash}"
        )
    x = probs.active_values()
    if x.shape[0] != model.spec.input_width:
        raise MeasurementMismatchError(
            f"active projector count {x.shape[0]} does not match model input width "
            f"{model.spec.input_width}"
        )
    return _wrap_output(model, predict_batch(model, x))


def predict_independent(
    model: NetworkModel, pset: ProjectorSet, probs: ProbabilityRecord
) -> measures.CorrelationTarget:
    """Prediction from the measurement-independent model for any subset of
    the canonical full set (no retraining)."""
    if model.meta.get("pipeline") != PIPELINE_INDEPENDENT:
        raise MeasurementMismatchError("model is not a measurement-independent estimator")
    if int(model.meta.get("n_qubits", 0)) != pset.n_qubits:
        raise MeasurementMismatchError("model and projector set disagree on qubit count")
    if probs.active_mask.sum() == 0:
        logger.warning("empty projector mask: prediction carries no measurement information")
    x = encode_independent_input(pset, probs)
    return _wrap_output(model, predict_batch(model, x))


def _wrap_output(model: NetworkModel, output: np.ndarray) -> measures.CorrelationTarget:
    kind = model.meta.get("target_kind")
    return measures.CorrelationTarget(kind=kind, values=np.atleast_1d(output))


def _check_kind_compatible(target_kind: str, n_qubits: int) -> None:
    needed = {
        measures.KIND_CONCURRENCE: 2,
        measures.KIND_MUTUAL_INFO_2Q: 2,
        measures.KIND_MUTUAL_INFO_3Q: 3,
    }[target_kind]
    if needed != n_qubits:
        raise ValueError(f"target {target_kind!r} needs {needed} qubits, measurement has {n_qubits}")
