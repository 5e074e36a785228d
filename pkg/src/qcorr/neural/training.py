"""Mini-batch training loop with best-model tracking, early stopping, and
optional incremental dataset refresh.

A refresh regenerates the training set after a validation plateau (used for
three qubits, where memory bounds the per-round dataset size) and training
continues with the same optimizer state until the epoch budget is spent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..seeding import child_rng
from .network import NetworkModel, backward, forward, mae_loss
from .optimizer import NAdamHyper, NAdamState, nadam_step


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    batches_per_epoch: int = 100
    patience: int = 200
    incremental: bool = False
    dataset_refresh_size: int = 0  # 0 -> refresh callback picks the size
    # 0 = refresh only on validation plateau; n > 0 additionally refreshes
    # every n epochs (cheap augmentation, e.g. re-drawing projector masks)
    refresh_every_epochs: int = 0

    def __post_init__(self):
        if min(self.epochs, self.batches_per_epoch, self.patience) < 1:
            raise ValueError("epochs, batches_per_epoch, and patience must be positive")
        if self.dataset_refresh_size < 0 or self.refresh_every_epochs < 0:
            raise ValueError("refresh sizes must be nonnegative")


def _coerce_pair(dataset):
    if isinstance(dataset, tuple):
        inputs, targets = dataset
    else:
        inputs, targets = dataset.inputs, dataset.targets
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
    if inputs.shape[0] != targets.shape[0] or inputs.shape[0] == 0:
        raise ValueError("dataset inputs/targets misaligned or empty")
    return inputs, targets


def train(
    model: NetworkModel,
    train_set,
    val_set,
    cfg: TrainConfig,
    refresh=None,
    rng: np.random.Generator | None = None,
    hyper: NAdamHyper | None = None,
    state: NAdamState | None = None,
    log=None,
):
    """Optimize ``model`` in place; returns (best-validation model, history).

    ``train_set``/``val_set`` are (inputs, targets) pairs or objects with
    those attributes. ``refresh(size) -> (inputs, targets)`` supplies a fresh
    training set in incremental mode. ``rng`` drives the per-epoch shuffles
    (defaults to a stream derived from the model seed). History holds one
    dict per executed epoch.
    """
    x_train, y_train = _coerce_pair(train_set)
    x_val, y_val = _coerce_pair(val_set)

    if rng is None:
        rng = child_rng(model.rng_seed, "shuffle")
    if state is None:
        state = NAdamState.fresh(model.theta.size, hyper)
    elif hyper is not None and state.hyper != hyper:
        raise ValueError("conflicting NAdam hyperparameters between state and argument")

    best_theta = model.theta.copy()
    best_val = np.inf
    best_epoch = 0
    since_improvement = 0
    history = []

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(x_train.shape[0])
        n_batches = min(cfg.batches_per_epoch, x_train.shape[0])
        train_mae = 0.0
        for batch in np.array_split(order, n_batches):
            grad, loss = backward(model, x_train[batch], y_train[batch])
            nadam_step(state, model.theta, grad)
            train_mae += loss
        train_mae /= n_batches

        val_mae = mae_loss(forward(model, x_val), y_val)
        refreshed = False
        if val_mae < best_val:
            best_val = val_mae
            best_theta = model.theta.copy()
            best_epoch = epoch
            since_improvement = 0
        else:
            since_improvement += 1

        stop = False
        if since_improvement >= cfg.patience:
            if cfg.incremental and refresh is not None:
                x_train, y_train = _coerce_pair(
                    refresh(cfg.dataset_refresh_size or x_train.shape[0])
                )
                since_improvement = 0
                refreshed = True
            else:
                stop = True
        elif (
            refresh is not None
            and cfg.refresh_every_epochs
            and epoch % cfg.refresh_every_epochs == 0
            and epoch < cfg.epochs
        ):
            x_train, y_train = _coerce_pair(refresh(cfg.dataset_refresh_size or x_train.shape[0]))
            refreshed = True

        history.append(
            {
                "epoch": epoch,
                "train_mae": train_mae,
                "val_mae": val_mae,
                "best_val": best_val,
                "refreshed": refreshed,
            }
        )
        if log is not None:
            log(history[-1])
        if stop:
            break

    best_model = NetworkModel(
        spec=model.spec, theta=best_theta, rng_seed=model.rng_seed, meta=dict(model.meta)
    )
    best_model.meta["best_epoch"] = best_epoch
    best_model.meta["best_val_mae"] = best_val
    return best_model, history
