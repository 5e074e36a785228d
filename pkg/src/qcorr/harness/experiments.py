"""Experiment engine behind the CLI: training pools, model caching, the
MAE-vs-projector-count sweep, and the Werner-state sweep.

All three estimation methods in a sweep consume the identical test states
and, where applicable, the identical mask draws, so comparisons are paired.
Heavy artifacts (trained models) are cached in a models directory under
deterministic names that embed a hash of everything that influences their
bytes; reruns either reuse or regenerate identical files.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .. import measures
from ..errors import ConfigError, UninformativeMeasurementError
from ..estimators import (
    PIPELINE_INDEPENDENT,
    PIPELINE_SPECIFIC,
    TrainingDataset,
    correlation_targets,
    encode_independent_batch,
    predict_batch,
    sample_training_states,
    slot_width,
)
from ..maxlik import MaxLikConfig, reconstruct
from ..measurement import (
    KIND_EXACT_BORN,
    KIND_FREQUENCY,
    ProbabilityRecord,
    ProjectorSet,
    born_probabilities,
    gram_inverse_sqrt,
    gram_operator,
    pauli_projectors,
)
from ..neural import (
    Conv1dSpec,
    DenseSpec,
    NAdamHyper,
    NetworkModel,
    NetworkSpec,
    TrainConfig,
    forward,
    initialize_model,
    load_model,
    save_model,
    train,
)
from ..seeding import child_rng, child_seed
from ..states import sample_bures_state, werner_state
from .results import config_hash

logger = logging.getLogger("qcorr.harness")

TARGET_KINDS_BY_QUBITS = {
    2: (measures.KIND_CONCURRENCE, measures.KIND_MUTUAL_INFO_2Q),
    3: (measures.KIND_MUTUAL_INFO_3Q,),
}

# Hidden widths (the final width-1 or width-3 layer is appended separately).
# "paper" reproduces the published 7-layer, ~1e6-parameter stack; "desk" is
# the scaled-down default that fits a desktop CPU budget.
ARCH_PROFILES = {
    "paper": (512, 512, 512, 384, 256, 128),
    "desk": (160, 160, 160, 128, 96, 64),
    "tiny": (32, 32, 16),  # fast tests only
}


def network_spec_for(
    pipeline: str,
    input_width: int,
    output_width: int,
    arch: str = "desk",
    n_qubits: int = 2,
    conv_channels: int = 16,
) -> NetworkSpec:
    """Dense stack for specific models; conv front end (kernel = stride =
    slot width) plus the same dense stack for the independent model."""
    try:
        hidden = ARCH_PROFILES[arch]
    except KeyError:
        raise ConfigError(f"unknown architecture profile {arch!r}; known: {sorted(ARCH_PROFILES)}")
    layers = []
    if pipeline == PIPELINE_INDEPENDENT:
        slot = slot_width(n_qubits)
        if input_width % slot:
            raise ConfigError(f"independent input width {input_width} is not a multiple of slot {slot}")
        layers.append(Conv1dSpec(kernel_width=slot, stride=slot, channels=conv_channels))
    layers += [DenseSpec(width=w) for w in hidden]
    # Linear head; predictions are clamped to the target range downstream.
    # A sigmoid head saturates on the large mass of exactly-zero concurrence
    # targets and measurably hurts accuracy.
    layers.append(DenseSpec(width=output_width, activation="linear"))
    return NetworkSpec(input_width=input_width, layers=tuple(layers))


@dataclass(frozen=True)
class TrainProtocol:
    """Everything that shapes a trained model apart from its mask and seed."""

    n_train_states: int = 50000
    epochs: int = 500
    batches_per_epoch: int = 100
    patience: int = 200
    arch: str = "desk"
    eta: float = 0.001
    conv_channels: int = 16
    k_range: tuple | None = None  # independent-training subset sizes

    def to_dict(self) -> dict:
        return {
            "n_train_states": self.n_train_states,
            "epochs": self.epochs,
            "batches_per_epoch": self.batches_per_epoch,
            "patience": self.patience,
            "arch": self.arch,
            "eta": self.eta,
            "conv_channels": self.conv_channels,
            "k_range": list(self.k_range) if self.k_range else None,
        }


@dataclass(frozen=True)
class TrainingPool:
    """Shared state pool: full-set Born probabilities plus targets, with one
    fixed train/val split permutation reused by every model in a sweep."""

    n_qubits: int
    target_kind: str
    probs_full: np.ndarray
    targets: np.ndarray
    split: np.ndarray
    seed: int

    @property
    def n_states(self) -> int:
        return self.probs_full.shape[0]

    def train_val_indices(self):
        n_train = (4 * self.n_states) // 5
        return self.split[:n_train], self.split[n_train:]

    def materialize(self) -> "TrainingPool":
        return self


def build_training_pool(n_states: int, n_qubits: int, target_kind: str, seed: int) -> TrainingPool:
    rng = child_rng(seed, "train-pool", n_qubits, target_kind, n_states)
    states = sample_training_states(n_states, n_qubits, rng)
    pset = pauli_projectors(n_qubits)
    probs = np.stack([born_probabilities(s, pset).values for s in states])
    targets = correlation_targets(states, target_kind)
    return TrainingPool(
        n_qubits=n_qubits,
        target_kind=target_kind,
        probs_full=probs,
        targets=targets,
        split=rng.permutation(n_states),
        seed=seed,
    )


class PoolHandle:
    """Lazy stand-in for a TrainingPool: carries the metadata cache names
    need, materializes states only if a model actually has to train."""

    def __init__(self, n_states: int, n_qubits: int, target_kind: str, seed: int):
        self.n_states = n_states
        self.n_qubits = n_qubits
        self.target_kind = target_kind
        self.seed = seed
        self._pool = None

    def materialize(self) -> TrainingPool:
        if self._pool is None:
            logger.info(
                "building training pool: %d states, %d qubits, %s",
                self.n_states,
                self.n_qubits,
                self.target_kind,
            )
            self._pool = build_training_pool(self.n_states, self.n_qubits, self.target_kind, self.seed)
        return self._pool


def pool_specific_datasets(pool: TrainingPool, pset: ProjectorSet):
    """(train, val) datasets holding the active-projector probability columns."""
    tr, va = pool.train_val_indices()
    cols = pset.active_mask
    meta = {
        "pipeline": PIPELINE_SPECIFIC,
        "n_qubits": pool.n_qubits,
        "target_kind": pool.target_kind,
        "measurement_hash": pset.measurement_hash(),
        "mask": "".join("1" if on else "0" for on in pset.active_mask),
        "seed": pool.seed,
    }
    train_ds = TrainingDataset(pool.probs_full[np.ix_(tr, cols)], pool.targets[tr], meta)
    val_ds = TrainingDataset(pool.probs_full[np.ix_(va, cols)], pool.targets[va], meta)
    return train_ds, val_ds


def _masked_encoding(pool: TrainingPool, pset: ProjectorSet, rows, k_lo, k_hi, rng):
    """Slot-encode the given pool rows under freshly drawn random subsets."""
    full = pset.full_size
    masks = np.zeros((len(rows), full), dtype=bool)
    for i in range(len(rows)):
        k = int(rng.integers(k_lo, k_hi + 1))
        masks[i, rng.choice(full, size=k, replace=False)] = True
    return encode_independent_batch(pset, masks, pool.probs_full[rows]), pool.targets[rows]


def independent_k_range(pset: ProjectorSet, k_range=None):
    full = pset.full_size
    k_lo, k_hi = k_range or (max(4, full // 6), full)
    if not 1 <= k_lo <= k_hi <= full:
        raise ConfigError(f"bad subset size range ({k_lo}, {k_hi})")
    return int(k_lo), int(k_hi)


def pool_independent_datasets(pool: TrainingPool, pset: ProjectorSet, k_range, seed: int):
    """(train, val) datasets of zero-padded slot encodings, one fresh random
    subset per sample."""
    k_lo, k_hi = independent_k_range(pset, k_range)
    rng = child_rng(seed, "independent-masks", k_lo, k_hi)
    tr, va = pool.train_val_indices()
    meta = {
        "pipeline": PIPELINE_INDEPENDENT,
        "n_qubits": pool.n_qubits,
        "target_kind": pool.target_kind,
        "subset_sizes": [k_lo, k_hi],
        "seed": pool.seed,
    }
    val_inputs, val_targets = _masked_encoding(pool, pset, va, k_lo, k_hi, rng)
    train_inputs, train_targets = _masked_encoding(pool, pset, tr, k_lo, k_hi, rng)
    return (
        TrainingDataset(train_inputs, train_targets, meta),
        TrainingDataset(val_inputs, val_targets, meta),
    )


@dataclass(frozen=True)
class TestBank:
    """Shared evaluation set: Bures-measure states with exact Born
    probabilities over the full set, optionally with simulated finite-shot
    frequencies; identical rows feed every method."""

    n_qubits: int
    target_kind: str
    probs_full: np.ndarray
    targets: np.ndarray
    seed: int
    shots: int | None = None
    freqs_full: np.ndarray | None = None

    @property
    def data_rows(self) -> np.ndarray:
        return self.probs_full if self.freqs_full is None else self.freqs_full

    @property
    def record_kind(self) -> str:
        return KIND_EXACT_BORN if self.freqs_full is None else KIND_FREQUENCY


def build_test_bank(
    n_states: int, n_qubits: int, target_kind: str, seed: int, shots: int | None = None
) -> TestBank:
    rng = child_rng(seed, "test-bank", n_qubits, target_kind, n_states)
    states = [sample_bures_state(n_qubits, rng) for _ in range(n_states)]
    pset = pauli_projectors(n_qubits)
    probs = np.stack([born_probabilities(s, pset).values for s in states])
    targets = correlation_targets(states, target_kind)
    freqs = None
    if shots is not None:
        noise_rng = child_rng(seed, "test-noise", shots)
        freqs = noise_rng.binomial(int(shots), np.clip(probs, 0.0, 1.0)) / float(shots)
    return TestBank(
        n_qubits=n_qubits,
        target_kind=target_kind,
        probs_full=probs,
        targets=targets,
        seed=seed,
        shots=shots,
        freqs_full=freqs,
    )


def draw_invertible_masks(pset: ProjectorSet, k: int, count: int, rng: np.random.Generator):
    """Uniform k-subsets whose Gram operator is invertible; singular draws
    are logged and resampled so every method sees the same number of masks."""
    masks = []
    attempts = 0
    while len(masks) < count:
        attempts += 1
        if attempts > 200 * count:
            raise UninformativeMeasurementError(
                f"could not find {count} invertible-Gram masks of size {k}"
            )
        chosen = rng.choice(pset.full_size, size=k, replace=False)
        mask = np.zeros(pset.full_size, dtype=bool)
        mask[chosen] = True
        try:
            gram_inverse_sqrt(gram_operator(pset.with_mask(mask)))
        except UninformativeMeasurementError:
            logger.info("resampled singular-Gram mask at k=%d (attempt %d)", k, attempts)
            continue
        masks.append(mask)
    return masks


def _model_cache_name(pipeline, target_kind, n_qubits, protocol, pool_seed, seed, mask_hash, idx):
    blob = {
        "pipeline": pipeline,
        "target": target_kind,
        "n_qubits": n_qubits,
        "protocol": protocol.to_dict(),
        "pool_seed": pool_seed,
        "seed": seed,
        "mask": mask_hash,
    }
    tag = config_hash(blob)[:12]
    if pipeline == PIPELINE_SPECIFIC:
        return f"specific_{target_kind}_{n_qubits}q_i{idx}_{tag}.qcm"
    return f"independent_{target_kind}_{n_qubits}q_{tag}.qcm"


def _train_log(prefix):
    def _log(row):
        if row["epoch"] == 1 or row["epoch"] % 50 == 0 or row["refreshed"]:
            logger.info(
                "%s epoch %d: train %.5f val %.5f best %.5f%s",
                prefix,
                row["epoch"],
                row["train_mae"],
                row["val_mae"],
                row["best_val"],
                " [refreshed]" if row["refreshed"] else "",
            )

    return _log


def ensure_specific_model(
    models_dir, pool, pset: ProjectorSet, protocol: TrainProtocol, seed: int, idx: int = 0
) -> NetworkModel:
    """Load the cached measurement-specific model for this (mask, protocol,
    seed) or train and cache it. ``pool`` may be a TrainingPool or a lazy
    PoolHandle; it is only materialized when training is needed."""
    name = _model_cache_name(
        PIPELINE_SPECIFIC,
        pool.target_kind,
        pool.n_qubits,
        protocol,
        pool.seed,
        seed,
        pset.measurement_hash(),
        idx,
    )
    path = os.path.join(models_dir, name)
    if os.path.exists(path):
        logger.info("reusing cached model %s", name)
        return load_model(path)
    train_ds, val_ds = pool_specific_datasets(pool.materialize(), pset)
    spec = network_spec_for(
        PIPELINE_SPECIFIC,
        input_width=train_ds.inputs.shape[1],
        output_width=train_ds.targets.shape[1],
        arch=protocol.arch,
        n_qubits=pool.n_qubits,
    )
    meta = dict(train_ds.meta)
    meta.update({"arch": protocol.arch, "protocol": protocol.to_dict(), "train_seed": seed})
    model = initialize_model(spec, seed=child_seed_int(seed, "init", name), meta=meta)
    cfg = TrainConfig(
        epochs=protocol.epochs, batches_per_epoch=protocol.batches_per_epoch, patience=protocol.patience
    )
    logger.info("training %s (%d parameters)", name, model.theta.size)
    best, _history = train(
        model,
        train_ds,
        val_ds,
        cfg,
        rng=child_rng(seed, "shuffle", name),
        hyper=NAdamHyper(eta=protocol.eta),
        log=_train_log(name),
    )
    os.makedirs(models_dir, exist_ok=True)
    save_model(best, path)
    return best


def ensure_independent_model(
    models_dir, pool, pset: ProjectorSet, protocol: TrainProtocol, seed: int
) -> NetworkModel:
    name = _model_cache_name(
        PIPELINE_INDEPENDENT,
        pool.target_kind,
        pool.n_qubits,
        protocol,
        pool.seed,
        seed,
        "all",
        0,
    )
    path = os.path.join(models_dir, name)
    if os.path.exists(path):
        logger.info("reusing cached model %s", name)
        return load_model(path)

    # The subset a sample is measured with is re-drawn every epoch: the mask
    # space is huge, and with one fixed mask per state the network memorizes
    # (state, mask) pairs instead of generalizing across measurements.
    materialized = pool.materialize()
    k_lo, k_hi = independent_k_range(pset, protocol.k_range)
    mask_rng = child_rng(seed, "independent-masks", k_lo, k_hi)
    tr, va = materialized.train_val_indices()
    val_ds = _masked_encoding(materialized, pset, va, k_lo, k_hi, mask_rng)
    train_ds = _masked_encoding(materialized, pset, tr, k_lo, k_hi, mask_rng)

    def refresh(_size):
        return _masked_encoding(materialized, pset, tr, k_lo, k_hi, mask_rng)

    spec = network_spec_for(
        PIPELINE_INDEPENDENT,
        input_width=train_ds[0].shape[1],
        output_width=train_ds[1].shape[1],
        arch=protocol.arch,
        n_qubits=pool.n_qubits,
        conv_channels=protocol.conv_channels,
    )
    meta = {
        "pipeline": PIPELINE_INDEPENDENT,
        "n_qubits": pool.n_qubits,
        "target_kind": pool.target_kind,
        "subset_sizes": [k_lo, k_hi],
        "seed": pool.seed,
        "arch": protocol.arch,
        "protocol": protocol.to_dict(),
        "train_seed": seed,
    }
    model = initialize_model(spec, seed=child_seed_int(seed, "init", name), meta=meta)
    cfg = TrainConfig(
        epochs=protocol.epochs,
        batches_per_epoch=protocol.batches_per_epoch,
        patience=protocol.patience,
        refresh_every_epochs=1,
    )
    logger.info("training %s (%d parameters)", name, model.theta.size)
    best, _history = train(
        model,
        train_ds,
        val_ds,
        cfg,
        refresh=refresh,
        rng=child_rng(seed, "shuffle", name),
        hyper=NAdamHyper(eta=protocol.eta),
        log=_train_log(name),
    )
    os.makedirs(models_dir, exist_ok=True)
    save_model(best, path)
    return best


def child_seed_int(seed, *parts) -> int:
    return child_seed(seed, *parts)


def specific_abs_errors(model: NetworkModel, mask: np.ndarray, data_rows: np.ndarray, targets: np.ndarray):
    preds = predict_batch(model, data_rows[:, mask])
    if preds.ndim == 1:
        preds = preds[:, None]
    return np.mean(np.abs(preds - targets), axis=1)


def independent_abs_errors(
    model: NetworkModel, pset: ProjectorSet, mask: np.ndarray, data_rows: np.ndarray, targets: np.ndarray
):
    masks = np.broadcast_to(mask, data_rows.shape)
    inputs = encode_independent_batch(pset, masks, data_rows)
    preds = predict_batch(model, inputs)
    if preds.ndim == 1:
        preds = preds[:, None]
    return np.mean(np.abs(preds - targets), axis=1)


def _maxlik_mask_errors(args):
    """Worker task: MaxLik reconstruction errors of every test row under one
    mask. Top-level function so it can cross process boundaries."""
    projectors, n_qubits, target_kind, mask, data_rows, targets, max_iterations, tol = args
    pset = ProjectorSet(
        n_qubits=n_qubits,
        projectors=projectors,
        labels=tuple([""] * projectors.shape[0]),
        active_mask=mask,
    )
    cfg = MaxLikConfig(max_iterations=max_iterations, convergence_tol=tol)
    errs = np.empty(data_rows.shape[0], dtype=np.float64)
    for i in range(data_rows.shape[0]):
        record = ProbabilityRecord(values=data_rows[i] * mask, kind=KIND_FREQUENCY, active_mask=mask)
        result = reconstruct(record, pset, cfg)
        est = measures.correlation_target(result.estimate, target_kind).values
        errs[i] = float(np.mean(np.abs(est - targets[i])))
    return errs


def maxlik_abs_errors_per_mask(
    pset: ProjectorSet,
    masks,
    bank: TestBank,
    max_iterations: int = 1000,
    tol: float = 1e-10,
    workers: int = 1,
):
    """List of per-state |error| arrays, one per mask."""
    tasks = [
        (
            pset.projectors,
            pset.n_qubits,
            bank.target_kind,
            mask,
            bank.data_rows,
            bank.targets,
            max_iterations,
            tol,
        )
        for mask in masks
    ]
    if workers <= 1 or len(tasks) <= 1:
        return [_maxlik_mask_errors(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_maxlik_mask_errors, tasks))


@dataclass(frozen=True)
class SweepConfig:
    n_qubits: int = 2
    target_kind: str = measures.KIND_CONCURRENCE
    projector_counts: tuple = (36, 28, 24, 18, 12, 8)
    n_specific_networks_per_count: int = 3
    n_random_measurements: int = 50
    test_set_size: int = 500
    noise_shots: int | None = None
    seed: int = 0
    protocol: TrainProtocol = field(default_factory=TrainProtocol)
    maxlik_iterations: int = 1000
    maxlik_tol: float = 1e-10

    def __post_init__(self):
        full = 6 ** self.n_qubits
        if any(not 1 <= k <= full for k in self.projector_counts):
            raise ConfigError(f"projector counts must lie in [1, {full}]")
        if min(self.n_specific_networks_per_count, self.n_random_measurements, self.test_set_size) < 1:
            raise ConfigError("sweep sizes must be positive")
        if self.target_kind not in TARGET_KINDS_BY_QUBITS[self.n_qubits]:
            raise ConfigError(
                f"target {self.target_kind!r} incompatible with {self.n_qubits} qubits"
            )

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "target_kind": self.target_kind,
            "projector_counts": list(self.projector_counts),
            "n_specific_networks_per_count": self.n_specific_networks_per_count,
            "n_random_measurements": self.n_random_measurements,
            "test_set_size": self.test_set_size,
            "noise_shots": self.noise_shots,
            "seed": self.seed,
            "protocol": self.protocol.to_dict(),
            "maxlik_iterations": self.maxlik_iterations,
            "maxlik_tol": self.maxlik_tol,
        }


@dataclass(frozen=True)
class SweepCell:
    method: str
    projector_count: int
    n_repetitions: int
    mae_mean: float
    mae_std: float
    runtime_s: float
    per_repetition_mae: tuple


@dataclass(frozen=True)
class SweepResult:
    config: dict
    cells: tuple
    model_hashes: dict

    def cell(self, method: str, count: int) -> SweepCell:
        for c in self.cells:
            if c.method == method and c.projector_count == count:
                return c
        raise KeyError((method, count))


def run_sweep_mae(cfg: SweepConfig, models_dir, workers: int = 1) -> SweepResult:
    """Paired MAE comparison of MaxLik, measurement-specific DNNs, and the
    measurement-independent DNN across projector counts."""
    import time as _time

    pset = pauli_projectors(cfg.n_qubits)
    bank = build_test_bank(
        cfg.test_set_size, cfg.n_qubits, cfg.target_kind, cfg.seed, shots=cfg.noise_shots
    )
    pool = PoolHandle(cfg.protocol.n_train_states, cfg.n_qubits, cfg.target_kind, cfg.seed)
    indep_model = ensure_independent_model(models_dir, pool, pset, cfg.protocol, cfg.seed)

    cells = []
    model_hashes = {}
    for k in cfg.projector_counts:
        mask_rng = child_rng(cfg.seed, "masks", cfg.n_qubits, k)
        masks = draw_invertible_masks(pset, k, cfg.n_random_measurements, mask_rng)

        t0 = _time.perf_counter()
        ml_errors = maxlik_abs_errors_per_mask(
            pset, masks, bank, cfg.maxlik_iterations, cfg.maxlik_tol, workers
        )
        ml_mae = np.array([e.mean() for e in ml_errors])
        cells.append(_cell("maxlik", k, ml_mae, _time.perf_counter() - t0))
        logger.info("k=%d maxlik MAE %.5f ± %.5f", k, ml_mae.mean(), ml_mae.std())

        t0 = _time.perf_counter()
        spec_mae = []
        n_nets = min(cfg.n_specific_networks_per_count, len(masks))
        for i in range(n_nets):
            sub = pset.with_mask(masks[i])
            model = ensure_specific_model(models_dir, pool, sub, cfg.protocol, cfg.seed, idx=i)
            model_hashes[f"specific_k{k}_i{i}"] = _theta_hash(model)
            spec_mae.append(specific_abs_errors(model, masks[i], bank.data_rows, bank.targets).mean())
        spec_mae = np.array(spec_mae)
        cells.append(_cell("specific", k, spec_mae, _time.perf_counter() - t0))
        logger.info("k=%d specific MAE %.5f ± %.5f", k, spec_mae.mean(), spec_mae.std())

        t0 = _time.perf_counter()
        ind_mae = np.array(
            [
                independent_abs_errors(indep_model, pset, mask, bank.data_rows, bank.targets).mean()
                for mask in masks
            ]
        )
        cells.append(_cell("independent", k, ind_mae, _time.perf_counter() - t0))
        logger.info("k=%d independent MAE %.5f ± %.5f", k, ind_mae.mean(), ind_mae.std())

    model_hashes["independent"] = _theta_hash(indep_model)
    return SweepResult(config=cfg.to_dict(), cells=tuple(cells), model_hashes=model_hashes)


def _cell(method: str, k: int, per_rep: np.ndarray, runtime: float) -> SweepCell:
    return SweepCell(
        method=method,
        projector_count=int(k),
        n_repetitions=len(per_rep),
        mae_mean=float(per_rep.mean()),
        mae_std=float(per_rep.std()),
        runtime_s=float(runtime),
        per_repetition_mae=tuple(float(x) for x in per_rep),
    )


def _theta_hash(model: NetworkModel) -> str:
    import hashlib

    return hashlib.sha256(model.theta.astype("<f8").tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class WernerConfig:
    projector_counts: tuple = (36, 28, 18, 8)
    p_grid_size: int = 21
    n_masks_per_count: int = 3
    noise_shots: int | None = None
    seed: int = 0
    protocol: TrainProtocol = field(default_factory=TrainProtocol)
    maxlik_iterations: int = 1000
    maxlik_tol: float = 1e-10

    def to_dict(self) -> dict:
        return {
            "projector_counts": list(self.projector_counts),
            "p_grid_size": self.p_grid_size,
            "n_masks_per_count": self.n_masks_per_count,
            "noise_shots": self.noise_shots,
            "seed": self.seed,
            "protocol": self.protocol.to_dict(),
            "maxlik_iterations": self.maxlik_iterations,
            "maxlik_tol": self.maxlik_tol,
        }


def werner_true_concurrence(p: float) -> float:
    return max(0.0, (3.0 * p - 1.0) / 2.0)


def run_werner_sweep(cfg: WernerConfig, models_dir, workers: int = 1):
    """Concurrence of Werner states vs p for every method.

    Reuses the measurement-specific models of the MAE sweep (same seed and
    protocol derive the same masks); returns rows
    (method, projector_count, p, mean, std).
    """
    pset = pauli_projectors(2)
    pool = PoolHandle(cfg.protocol.n_train_states, 2, measures.KIND_CONCURRENCE, cfg.seed)
    indep_model = ensure_independent_model(models_dir, pool, pset, cfg.protocol, cfg.seed)

    p_grid = np.linspace(0.0, 1.0, cfg.p_grid_size)
    werner_states = [werner_state(float(p)) for p in p_grid]
    probs = np.stack([born_probabilities(s, pset).values for s in werner_states])
    if cfg.noise_shots is not None:
        noise_rng = child_rng(cfg.seed, "werner-noise", cfg.noise_shots)
        probs = noise_rng.binomial(int(cfg.noise_shots), np.clip(probs, 0, 1)) / float(cfg.noise_shots)
    truth = np.array([[werner_true_concurrence(float(p))] for p in p_grid])

    rows = []
    for k in cfg.projector_counts:
        mask_rng = child_rng(cfg.seed, "masks", 2, k)
        masks = draw_invertible_masks(pset, k, cfg.n_masks_per_count, mask_rng)

        ml_values = np.stack(
            _maxlik_values_per_mask(pset, masks, probs, cfg.maxlik_iterations, cfg.maxlik_tol, workers)
        )  # (masks, p)

        spec_values = []
        for i, mask in enumerate(masks):
            sub = pset.with_mask(mask)
            model = ensure_specific_model(models_dir, pool, sub, cfg.protocol, cfg.seed, idx=i)
            preds = predict_batch(model, probs[:, mask])
            spec_values.append(np.atleast_2d(preds.T)[0])
        spec_values = np.stack(spec_values)

        ind_values = []
        for mask in masks:
            inputs = encode_independent_batch(pset, np.broadcast_to(mask, probs.shape), probs)
            preds = predict_batch(indep_model, inputs)
            ind_values.append(np.atleast_2d(preds.T)[0])
        ind_values = np.stack(ind_values)

        for pi, p in enumerate(p_grid):
            rows.append(("true", k, float(p), truth[pi, 0], 0.0))
            rows.append(("maxlik", k, float(p), float(ml_values[:, pi].mean()), float(ml_values[:, pi].std())))
            rows.append(("specific", k, float(p), float(spec_values[:, pi].mean()), float(spec_values[:, pi].std())))
            rows.append(
                ("independent", k, float(p), float(ind_values[:, pi].mean()), float(ind_values[:, pi].std()))
            )
        logger.info("werner k=%d done", k)
    return rows


def _maxlik_values_per_mask(pset, masks, probs, max_iterations, tol, workers):
    """Concurrence of the MaxLik estimate for every (mask, state row)."""
    tasks = [
        (pset.projectors, pset.n_qubits, measures.KIND_CONCURRENCE, mask, probs, None, max_iterations, tol)
        for mask in masks
    ]
    if workers <= 1 or len(tasks) <= 1:
        return [_maxlik_mask_values(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_maxlik_mask_values, tasks))


def _maxlik_mask_values(args):
    projectors, n_qubits, target_kind, mask, data_rows, _unused, max_iterations, tol = args
    pset = ProjectorSet(
        n_qubits=n_qubits,
        projectors=projectors,
        labels=tuple([""] * projectors.shape[0]),
        active_mask=mask,
    )
    cfg = MaxLikConfig(max_iterations=max_iterations, convergence_tol=tol)
    values = np.empty(data_rows.shape[0], dtype=np.float64)
    for i in range(data_rows.shape[0]):
        record = ProbabilityRecord(values=data_rows[i] * mask, kind=KIND_FREQUENCY, active_mask=mask)
        result = reconstruct(record, pset, cfg)
        values[i] = measures.correlation_target(result.estimate, target_kind).values[0]
    return values
