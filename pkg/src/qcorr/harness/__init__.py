"""CLI entry point and experiment engine."""

from .experiments import (
    SweepConfig,
    SweepResult,
    TrainProtocol,
    WernerConfig,
    build_test_bank,
    build_training_pool,
    run_sweep_mae,
    run_werner_sweep,
)

__all__ = [
    "SweepConfig",
    "SweepResult",
    "TrainProtocol",
    "WernerConfig",
    "build_test_bank",
    "build_training_pool",
    "run_sweep_mae",
    "run_werner_sweep",
]
