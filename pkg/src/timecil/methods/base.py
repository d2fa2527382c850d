"""Plugin protocol for CIL methods.

The trainer is method-agnostic: each method customizes exactly three
hooks: a replay batch appended to every step (batch augmentation), an
extra loss term per step (loss augmentation), and an end-of-task update
run once after convergence with the restored best parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import torch

from ..data.types import SampleSet, Task
from ..models.backbone import ForwardResult, IncrementalClassifier


@dataclass
class StepContext:
    """Everything a plugin may inspect about the current optimization step."""

    model: IncrementalClassifier
    result: ForwardResult          # forward over new + replay samples
    x_new: torch.Tensor
    y_new: np.ndarray              # original class ids, new-task half
    n_new: int
    new_indices: np.ndarray        # positions inside the task's train set
    new_losses: torch.Tensor       # detached per-sample losses, new half
    task_index: int
    replay_entries: Optional[list] = None  # BufferEntry list when replaying


@torch.no_grad()
def batch_features(model: IncrementalClassifier, samples: SampleSet,
                   batch_size: int = 256) -> np.ndarray:
    """Pre-head embeddings in evaluation mode; training mode is restored."""
    was_training = model.training
    model.eval()
    chunks = []
    for start in range(0, len(samples), batch_size):
        x = torch.from_numpy(samples.values[start : start + batch_size])
        chunks.append(model(x).features.cpu().numpy())
    if was_training:
        model.train()
    return np.concatenate(chunks) if chunks else np.zeros((0, model.feature_dim), dtype=np.float32)


class MethodPlugin:
    """No-op base; sequential fine-tuning without any CIL machinery."""

    kind = "naive"
    patience = 5

    def active(self, task_index: int) -> bool:
        """True when the plugin will append a replay batch this task (the
        trainer then halves the new-task batch to keep 64 samples per step)."""
        return False

    def replay_batch(self, task_index: int, n: int):
        """Return (values, labels, entries-or-None) or None."""
        return None

    def extra_loss(self, ctx: StepContext):
        return 0.0

    def end_of_task(self, model: IncrementalClassifier, task: Task) -> None:
        return None


class NaivePlugin(MethodPlugin):
    pass
