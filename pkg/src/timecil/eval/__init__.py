from .metrics import (
    AccuracyMatrix,
    RunMetrics,
    avg_accuracy,
    avg_forgetting,
    avg_learning_accuracy,
    mean_confidence_interval,
)
from .config import ExperimentConfig
from .experiment import (
    ExperimentReport,
    SeedResult,
    build_streams,
    run_experiment,
    run_single,
)
from .tuning import expand_grid, tune_protocol_a, tune_protocol_b
from .ablation import ABLATION_AXES, ablation_sweep

__all__ = [
    "ABLATION_AXES",
    "AccuracyMatrix",
    "ExperimentConfig",
    "ExperimentReport",
    "RunMetrics",
    "SeedResult",
    "ablation_sweep",
    "avg_accuracy",
    "avg_forgetting",
    "avg_learning_accuracy",
    "build_streams",
    "expand_grid",
    "mean_confidence_interval",
    "run_experiment",
    "run_single",
    "tune_protocol_a",
    "tune_protocol_b",
]
