"""Command-line interface.

Subcommands: gen-data, train, sweep-mae, werner-sweep, maxlik, predict.
Each accepts ``--config FILE`` (JSON) whose entries are overridden by
explicit flags. Exit codes: 0 success, 2 configuration error, 3 data/file
error, 4 numerical error.

Every output file depends only on the seed and config (no timestamps), so
reruns are byte-identical; wall-clock timings go to the stderr log.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys

import numpy as np

from .. import measures
from ..datafiles import load_dataset, save_dataset
from ..errors import ConfigError, DataFormatError, NumericalError, QcorrError
from ..estimators import (
    PIPELINE_INDEPENDENT,
    PIPELINE_SPECIFIC,
    build_independent_training_set,
    build_training_set,
    correlation_targets,
    predict_independent,
    predict_specific,
)
from ..maxlik import MaxLikConfig, reconstruct
from ..measurement import load_counts_file, pauli_projectors, random_subset
from ..neural import NAdamHyper, TrainConfig, load_model, save_model, train
from ..neural.network import initialize_model
from ..seeding import child_rng
from ..states import sample_bures_state
from . import experiments
from .experiments import (
    SweepConfig,
    TrainProtocol,
    WernerConfig,
    network_spec_for,
    run_sweep_mae,
    run_werner_sweep,
)
from .results import config_hash, write_json_report, write_table

logger = logging.getLogger("qcorr.cli")

ENV_WORKER_CAP = "QCORR_MAX_WORKERS"


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        args.func(args)
        return 0
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return 2
    except (DataFormatError, OSError) as exc:
        logger.error("data error: %s", exc)
        return 3
    except NumericalError as exc:
        logger.error("numerical error: %s", exc)
        return 4
    except QcorrError as exc:
        logger.error("%s", exc)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcorr",
        description="Estimate two- and three-qubit quantum correlations from "
        "(incomplete) local measurements: MaxLik tomography and neural estimators.",
    )
    parser.add_argument("--quiet", action="store_true", help="log warnings and errors only")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("gen-data", help="generate train/val/test dataset files")
    _common(p)
    p.add_argument("--qubits", type=int, default=2, choices=(2, 3))
    p.add_argument("--target", default="concurrence", help="concurrence or mutual_info")
    p.add_argument("--states", type=int, default=1000)
    p.add_argument("--test-states", type=int, default=500)
    p.add_argument("--subset", type=int, default=None, help="random projector subset size")
    p.add_argument("--independent", action="store_true", help="emit slot-encoded inputs")
    p.add_argument("--k-lo", type=int, default=None)
    p.add_argument("--k-hi", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a model from dataset files")
    _common(p)
    p.add_argument("--data", required=True, help="directory with train.qds and val.qds")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--report", default=None, help="JSON training report (default <out>.report.json)")
    p.add_argument("--arch", default="desk", help="architecture profile")
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--batches", type=int, default=100)
    p.add_argument("--patience", type=int, default=200)
    p.add_argument("--eta", type=float, default=0.001)
    p.add_argument("--conv-channels", type=int, default=16)
    p.add_argument("--resume", default=None, help="model file to continue from")
    p.add_argument("--incremental", action="store_true")
    p.add_argument("--refresh-states", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep-mae", help="MAE vs projector count for all methods")
    _common(p)
    p.add_argument("--qubits", type=int, default=2, choices=(2, 3))
    p.add_argument("--target", default="concurrence")
    p.add_argument("--counts", default="36,28,24,18,12,8")
    p.add_argument("--specific-nets", type=int, default=3)
    p.add_argument("--masks", type=int, default=50)
    p.add_argument("--test-states", type=int, default=500)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--models-dir", default=None, help="model cache (default <out dir>/models)")
    _training_flags(p)
    p.set_defaults(func=cmd_sweep_mae)

    p = sub.add_parser("werner-sweep", help="Werner-state concurrence curves")
    _common(p)
    p.add_argument("--counts", default="36,28,18,8")
    p.add_argument("--p-grid", type=int, default=21)
    p.add_argument("--masks", type=int, default=3)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--models-dir", default=None)
    _training_flags(p)
    p.set_defaults(func=cmd_werner_sweep)

    p = sub.add_parser("maxlik", help="reconstruct a state from a counts file")
    _common(p)
    p.add_argument("--counts-file", required=True)
    p.add_argument("--out", default=None, help="JSON report path")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iterations", type=int, default=1000)
    p.add_argument("--already-normalized", action="store_true")
    p.set_defaults(func=cmd_maxlik)

    p = sub.add_parser("predict", help="neural correlation estimate from a counts file")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--counts-file", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--already-normalized", action="store_true")
    p.set_defaults(func=cmd_predict)
    return parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON config file; flags override its entries")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--quiet", action="store_true")


def _training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train-states", type=int, default=50000)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--batches", type=int, default=100)
    p.add_argument("--patience", type=int, default=200)
    p.add_argument("--arch", default="desk")
    p.add_argument("--eta", type=float, default=0.001)
    p.add_argument("--conv-channels", type=int, default=16)
    p.add_argument("--k-lo", type=int, default=None)
    p.add_argument("--k-hi", type=int, default=None)


def _apply_config_file(args: argparse.Namespace) -> argparse.Namespace:
    """Fill parser defaults from the JSON config; explicit flags win because
    argparse already parsed them (we only overwrite values equal to their
    declared defaults)."""
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
    parser_defaults = vars(_build_parser().parse_args([args.command, *_required_stub(args)]))
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"config key {key!r} is not a flag of {args.command}")
        if getattr(args, attr) == parser_defaults.get(attr):
            setattr(args, attr, value)
    return args


def _required_stub(args: argparse.Namespace):
    stubs = []
    for name in ("out", "data", "model", "counts_file"):
        if hasattr(args, name):
            stubs += [f"--{name.replace('_', '-')}", str(getattr(args, name))]
    return stubs


def _workers(args) -> int:
    cap = os.environ.get(ENV_WORKER_CAP)
    workers = max(1, int(args.workers))
    if cap:
        workers = min(workers, max(1, int(cap)))
    return workers


def _target_kind(target: str, n_qubits: int) -> str:
    name = target.strip().lower()
    if name == "concurrence":
        kind = measures.KIND_CONCURRENCE
    elif name in ("mutual_info", "mutual-info", "mutual_information"):
        kind = measures.KIND_MUTUAL_INFO_2Q if n_qubits == 2 else measures.KIND_MUTUAL_INFO_3Q
    elif name in (measures.KIND_MUTUAL_INFO_2Q, measures.KIND_MUTUAL_INFO_3Q):
        kind = name
    else:
        raise ConfigError(f"unknown target {target!r}")
    if kind not in experiments.TARGET_KINDS_BY_QUBITS[n_qubits]:
        raise ConfigError(f"target {target!r} is incompatible with {n_qubits} qubits")
    return kind


def _parse_counts(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(int(x) for x in text)
    try:
        return tuple(int(tok) for tok in str(text).split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"bad projector-count list {text!r}") from None


def cmd_gen_data(args) -> None:
    args = _apply_config_file(args)
    kind = _target_kind(args.target, args.qubits)
    if args.states < 5 or args.test_states < 1:
        raise ConfigError("need at least 5 training states and 1 test state")
    os.makedirs(args.out, exist_ok=True)

    pset = pauli_projectors(args.qubits)
    if args.subset is not None:
        pset = random_subset(pset, args.subset, child_rng(args.seed, "gen-subset", args.subset))

    rng = child_rng(args.seed, "gen-data", args.qubits, kind, args.states)
    if args.independent:
        k_range = (args.k_lo, args.k_hi) if args.k_lo and args.k_hi else None
        train_ds, val_ds = build_independent_training_set(
            args.states, pset, kind, rng, k_range=k_range, seed=args.seed
        )
    else:
        train_ds, val_ds = build_training_set(args.states, pset, kind, rng, seed=args.seed)

    # Test bank: Bures-only states with full-set probabilities, method-agnostic.
    bank = experiments.build_test_bank(args.test_states, args.qubits, kind, args.seed)
    test_meta = {
        "pipeline": "test-bank",
        "n_qubits": args.qubits,
        "target_kind": kind,
        "ensemble": "bures1.00",
        "mask": "1" * pset.full_size,
        "seed": args.seed,
    }
    from ..estimators import TrainingDataset

    test_ds = TrainingDataset(bank.probs_full, bank.targets, test_meta)

    save_dataset(train_ds, os.path.join(args.out, "train.qds"))
    save_dataset(val_ds, os.path.join(args.out, "val.qds"))
    save_dataset(test_ds, os.path.join(args.out, "test.qds"))
    manifest = {
        "config": _public_config(args, ["qubits", "target", "states", "test_states", "subset", "independent", "seed"]),
        "files": {},
    }
    for name in ("train.qds", "val.qds", "test.qds"):
        with open(os.path.join(args.out, name), "rb") as fh:
            manifest["files"][name] = hashlib.sha256(fh.read()).hexdigest()
    write_json_report(os.path.join(args.out, "manifest.json"), manifest)
    logger.info("wrote %s (train %d / val %d / test %d)", args.out, train_ds.n_samples, val_ds.n_samples, args.test_states)


def _public_config(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys}


def cmd_train(args) -> None:
    args = _apply_config_file(args)
    train_ds = load_dataset(os.path.join(args.data, "train.qds"))
    val_ds = load_dataset(os.path.join(args.data, "val.qds"))
    meta = dict(train_ds.meta)
    pipeline = meta.get("pipeline", PIPELINE_SPECIFIC)
    n_qubits = int(meta["n_qubits"])
    kind = meta["target_kind"]

    from ..neural import NAdamState

    state = None
    if args.resume:
        model, state = load_model(args.resume, with_optimizer=True)
        if model.spec.input_width != train_ds.inputs.shape[1]:
            raise ConfigError(
                f"resume model expects input width {model.spec.input_width}, "
                f"dataset has {train_ds.inputs.shape[1]}"
            )
    else:
        spec = network_spec_for(
            pipeline,
            input_width=train_ds.inputs.shape[1],
            output_width=train_ds.targets.shape[1],
            arch=args.arch,
            n_qubits=n_qubits,
            conv_channels=args.conv_channels,
        )
        meta.update({"arch": args.arch, "train_seed": args.seed})
        model = initialize_model(spec, seed=args.seed, meta=meta)

    refresh = None
    if args.incremental:
        if pipeline != PIPELINE_SPECIFIC:
            raise ConfigError("incremental refresh is implemented for specific datasets")
        mask = np.array([c == "1" for c in meta["mask"]], dtype=bool)
        pset = pauli_projectors(n_qubits).with_mask(mask)
        counter = {"round": 0}

        def refresh(size):
            counter["round"] += 1
            rng = child_rng(args.seed, "refresh", counter["round"])
            from ..estimators import sample_training_states
            from ..measurement import born_probabilities

            n = size or train_ds.n_samples
            states = sample_training_states(n, n_qubits, rng)
            inputs = np.stack([born_probabilities(s, pset).active_values() for s in states])
            return inputs, correlation_targets(states, kind)

    if state is None:
        state = NAdamState.fresh(model.theta.size, NAdamHyper(eta=args.eta))
    cfg = TrainConfig(
        epochs=args.epochs,
        batches_per_epoch=args.batches,
        patience=args.patience,
        incremental=args.incremental,
        dataset_refresh_size=args.refresh_states,
    )
    best, history = train(
        model,
        train_ds,
        val_ds,
        cfg,
        refresh=refresh,
        rng=child_rng(args.seed, "shuffle", "cmd-train"),
        state=state,
        log=experiments._train_log("train"),
    )
    # state was advanced in place by the training loop; persisting it makes
    # --resume continue with the accumulated moments
    save_model(best, args.out, optimizer_state=state)
    report_path = args.report or args.out + ".report.json"
    report = {
        "config": _public_config(
            args, ["data", "arch", "epochs", "batches", "patience", "eta", "seed", "incremental"]
        ),
        "epochs_run": len(history),
        "best_epoch": best.meta.get("best_epoch"),
        "best_val_mae": best.meta.get("best_val_mae"),
        "history": history,
        "model_sha256": hashlib.sha256(best.theta.astype("<f8").tobytes()).hexdigest(),
    }
    write_json_report(report_path, report)
    logger.info("model written to %s (best val MAE %.5f)", args.out, best.meta.get("best_val_mae", float("nan")))


def cmd_sweep_mae(args) -> None:
    args = _apply_config_file(args)
    kind = _target_kind(args.target, args.qubits)
    protocol = TrainProtocol(
        n_train_states=args.train_states,
        epochs=args.epochs,
        batches_per_epoch=args.batches,
        patience=args.patience,
        arch=args.arch,
        eta=args.eta,
        conv_channels=args.conv_channels,
        k_range=(args.k_lo, args.k_hi) if args.k_lo and args.k_hi else None,
    )
    cfg = SweepConfig(
        n_qubits=args.qubits,
        target_kind=kind,
        projector_counts=_parse_counts(args.counts),
        n_specific_networks_per_count=args.specific_nets,
        n_random_measurements=args.masks,
        test_set_size=args.test_states,
        noise_shots=args.shots,
        seed=args.seed,
        protocol=protocol,
    )
    models_dir = args.models_dir or os.path.join(os.path.dirname(os.path.abspath(args.out)) or ".", "models")
    result = run_sweep_mae(cfg, models_dir, workers=_workers(args))
    rows = [
        (c.method, c.projector_count, c.n_repetitions, c.mae_mean, c.mae_std)
        for c in result.cells
    ]
    write_table(
        args.out,
        "sweep-mae",
        result.config,
        ["method", "projector_count", "n_repetitions", "mae_mean", "mae_std"],
        rows,
    )
    for c in result.cells:
        logger.info(
            "%-12s k=%-3d MAE %.5f ± %.5f (%d reps, %.1fs)",
            c.method,
            c.projector_count,
            c.mae_mean,
            c.mae_std,
            c.n_repetitions,
            c.runtime_s,
        )
    logger.info("sweep written to %s", args.out)


def cmd_werner_sweep(args) -> None:
    args = _apply_config_file(args)
    protocol = TrainProtocol(
        n_train_states=args.train_states,
        epochs=args.epochs,
        batches_per_epoch=args.batches,
        patience=args.patience,
        arch=args.arch,
        eta=args.eta,
        conv_channels=args.conv_channels,
        k_range=(args.k_lo, args.k_hi) if args.k_lo and args.k_hi else None,
    )
    cfg = WernerConfig(
        projector_counts=_parse_counts(args.counts),
        p_grid_size=args.p_grid,
        n_masks_per_count=args.masks,
        noise_shots=args.shots,
        seed=args.seed,
        protocol=protocol,
    )
    models_dir = args.models_dir or os.path.join(os.path.dirname(os.path.abspath(args.out)) or ".", "models")
    rows = run_werner_sweep(cfg, models_dir, workers=_workers(args))
    write_table(
        args.out,
        "werner-sweep",
        cfg.to_dict(),
        ["method", "projector_count", "p", "mean", "std"],
        rows,
    )
    logger.info("werner sweep written to %s", args.out)


def cmd_maxlik(args) -> None:
    args = _apply_config_file(args)
    pset, record = load_counts_file(args.counts_file, already_normalized=args.already_normalized)
    cfg = MaxLikConfig(max_iterations=args.max_iterations, convergence_tol=args.tol)
    result = reconstruct(record, pset, cfg)
    rho = result.estimate

    report = {
        "counts_file": os.path.basename(args.counts_file),
        "n_qubits": pset.n_qubits,
        "n_active_projectors": pset.n_active,
        "measurement_hash": pset.measurement_hash(),
        "converged": result.converged,
        "iterations_used": result.iterations_used,
        "final_log_likelihood": result.final_log_likelihood,
        "estimate_re": [[float(x) for x in row] for row in rho.matrix.real],
        "estimate_im": [[float(x) for x in row] for row in rho.matrix.imag],
        "purity": rho.purity(),
    }
    if pset.n_qubits == 2:
        report["concurrence"] = measures.concurrence(rho)
        report["mutual_information"] = list(measures.mutual_information_matrix(rho).values)
    else:
        report["mutual_information"] = list(measures.mutual_information_matrix(rho).values)
    if args.out:
        write_json_report(args.out, report)
    json.dump(report, sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")


def cmd_predict(args) -> None:
    args = _apply_config_file(args)
    model = load_model(args.model)
    pset, record = load_counts_file(args.counts_file, already_normalized=args.already_normalized)
    pipeline = model.meta.get("pipeline")
    if pipeline == PIPELINE_INDEPENDENT:
        target = predict_independent(model, pset, record)
    elif pipeline == PIPELINE_SPECIFIC:
        target = predict_specific(model, record)
    else:
        raise ConfigError(f"model carries unknown pipeline {pipeline!r}")
    report = {
        "model": os.path.basename(args.model),
        "model_sha256": hashlib.sha256(model.theta.astype("<f8").tobytes()).hexdigest(),
        "pipeline": pipeline,
        "target_kind": target.kind,
        "values": [float(v) for v in target.values],
        "measurement_hash": pset.measurement_hash(),
        "n_active_projectors": pset.n_active,
        "record_kind": record.kind,
    }
    if args.out:
        write_json_report(args.out, report)
    json.dump(report, sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    sys.exit(main())
