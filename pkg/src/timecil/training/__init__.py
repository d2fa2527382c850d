from .early_stopping import EarlyStopper
from .logging import RunLogger
from .schedulers import SCHEDULERS, make_scheduler
from .trainer import (
    TrainConfig,
    evaluate_accuracy,
    evaluate_loss,
    run_offline,
    run_stream,
    train_task,
)

__all__ = [
    "EarlyStopper",
    "RunLogger",
    "SCHEDULERS",
    "TrainConfig",
    "evaluate_accuracy",
    "evaluate_loss",
    "make_scheduler",
    "run_offline",
    "run_stream",
    "train_task",
]
