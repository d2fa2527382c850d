"""Experience-replay pipeline: per-step memory batches plus an end-of-task
memory-update pass, with the update/retrieval policy pairs for each method."""

from __future__ import annotations

import numpy as np
import torch

from ..data.types import SampleSet, Task
from ..errors import ConfigError, ContractError
from ..memory.aser import aser_retrieve
from ..memory.buffer import (
    MemoryBuffer,
    SubjectBalancedRetriever,
    random_retrieve,
    reservoir_update,
    subject_restricted_update,
)
from ..memory.selection import clops_update, fasticarl_update, herding_update
from ..seeding import substream
from .base import MethodPlugin, StepContext, batch_features

REPLAY_KINDS = (
    "er", "der", "herding", "aser", "clops", "fasticarl",
    "er_subject_balanced", "er_subject_restricted",
)


def der_loss(mem_logits: torch.Tensor, entries: list, alpha: float) -> torch.Tensor:
    """alpha * MSE between current and stored logits of the replayed entries.

    When the head has grown since storage, current logits are sliced down to
    each entry's stored width.
    """
    if any(e.stored_logits is None for e in entries):
        raise ContractError("DER requires stored logits on every replayed entry")
    per_sample = []
    for i, entry in enumerate(entries):
        stored = torch.from_numpy(np.asarray(entry.stored_logits, dtype=np.float32))
        w = stored.shape[0]
        per_sample.append((mem_logits[i, :w] - stored).pow(2).mean())
    return alpha * torch.stack(per_sample).mean()


class ReplayPlugin(MethodPlugin):
    """Algorithm: retrieve a memory batch each step, train on the union,
    and run the MemoryUpdate policy in one pass after convergence."""

    patience = 20

    def __init__(self, kind: str, capacity: int, seed: int,
                 der_alpha: float = 0.5,
                 allowed_subjects=None,
                 aser_k_neighbors: int = 5,
                 aser_eval_points: int = 64,
                 update_batch: int = 64):
        if kind not in REPLAY_KINDS:
            raise ConfigError(f"unknown replay method {kind!r}; expected one of {REPLAY_KINDS}")
        self.kind = kind
        self.buffer = MemoryBuffer(capacity=capacity)
        self.seed = seed
        self.der_alpha = der_alpha
        self.allowed_subjects = None if allowed_subjects is None else sorted(int(s) for s in allowed_subjects)
        self.aser_k_neighbors = aser_k_neighbors
        self.aser_eval_points = aser_eval_points
        self.update_batch = update_batch
        self.rng = substream(seed, "buffer")
        self._balanced = SubjectBalancedRetriever() if kind == "er_subject_balanced" else None
        self._clops_task: int | None = None
        self._clops_scores: dict[int, list] = {}

    def active(self, task_index: int) -> bool:
        return len(self.buffer) > 0

    def replay_batch(self, task_index: int, n: int, new_batch: SampleSet = None, model=None):
        if len(self.buffer) == 0:
            return None
        if self.kind == "aser":
            entries = aser_retrieve(
                self.buffer, new_batch, n,
                lambda s: batch_features(model, s),
                self.rng, self.aser_k_neighbors, self.aser_eval_points,
            )
        elif self.kind == "er_subject_balanced":
            entries = self._balanced(self.buffer, n, self.rng)
        else:
            entries = random_retrieve(self.buffer, n, self.rng)
        if not entries:
            return None
        values = np.stack([e.sample.values for e in entries])
        labels = np.array([e.sample.label for e in entries], dtype=np.int64)
        return values, labels, entries

    def extra_loss(self, ctx: StepContext):
        if self.kind == "clops":
            self._track_clops(ctx)
        if self.kind == "der" and ctx.replay_entries:
            mem_logits = ctx.result.logits[ctx.n_new :]
            return der_loss(mem_logits, ctx.replay_entries, self.der_alpha)
        return 0.0

    def _track_clops(self, ctx: StepContext) -> None:
        """Running mean of per-sample training loss over the current task."""
        if ctx.task_index != self._clops_task:
            self._clops_task = ctx.task_index
            self._clops_scores = {}
        losses = ctx.new_losses.detach().cpu().numpy()
        for idx, loss in zip(ctx.new_indices, losses):
            acc = self._clops_scores.setdefault(int(idx), [0.0, 0])
            acc[0] += float(loss)
            acc[1] += 1

    def end_of_task(self, model, task: Task) -> None:
        order = substream(self.seed, "memory_pass", task.index).permutation(len(task.train))
        shuffled = task.train.subset(order)

        if self.kind in ("er", "der", "aser", "er_subject_balanced"):
            for start in range(0, len(shuffled), self.update_batch):
                chunk = shuffled.subset(np.arange(start, min(start + self.update_batch, len(shuffled))))
                reservoir_update(self.buffer, (chunk.sample(i) for i in range(len(chunk))), self.rng)
        elif self.kind == "er_subject_restricted":
            for start in range(0, len(shuffled), self.update_batch):
                chunk = shuffled.subset(np.arange(start, min(start + self.update_batch, len(shuffled))))
                subject_restricted_update(
                    self.buffer, (chunk.sample(i) for i in range(len(chunk))),
                    self.allowed_subjects, self.rng,
                )
        elif self.kind == "herding":
            herding_update(self.buffer, shuffled, lambda s: batch_features(model, s))
        elif self.kind == "fasticarl":
            fasticarl_update(self.buffer, shuffled, lambda s: batch_features(model, s))
        elif self.kind == "clops":
            means = np.zeros(len(task.train), dtype=np.float64)
            for idx, (total, count) in self._clops_scores.items():
                means[idx] = total / max(1, count)
            scores = None if not self._clops_scores else means[order]
            clops_update(self.buffer, shuffled, scores, self.rng)
            self._clops_scores = {}

        if self.kind == "der":
            self._capture_logits(model)

    @torch.no_grad()
    def _capture_logits(self, model) -> None:
        """Stamp converged-model logits onto entries inserted this task."""
        missing = [e for e in self.buffer.entries if e.stored_logits is None]
        if not missing:
            return
        was_training = model.training
        model.eval()
        values = torch.from_numpy(np.stack([e.sample.values for e in missing]))
        logits = model(values).logits.cpu().numpy()
        for entry, row in zip(missing, logits):
            entry.stored_logits = row.astype(np.float32)
        if was_training:
            model.train()
