"""Generative replay: a VAE trained incrementally next to the learner.

During task t the learner rehearses pseudo samples drawn from the frozen
generator of task t-1, labeled by the frozen learner of task t-1. The
generator itself is (re)trained only after the learner converges, on real
task data mixed with its own frozen replay, and the frozen pair is
refreshed once the task ends.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch

from ..data.types import SampleSet, Task
from ..models.backbone import IncrementalClassifier, freeze_copy
from ..models.vae import SeriesVAE, generate, vae_loss
from ..seeding import substream, torch_generator
from .base import MethodPlugin


@dataclass
class FrozenPair:
    """End-of-previous-task copies used for replay during the current task."""

    learner: IncrementalClassifier
    generator: SeriesVAE
    task_index: int  # the task after which the pair was frozen


@torch.no_grad()
def pseudo_label(frozen_learner: IncrementalClassifier, batch: torch.Tensor) -> np.ndarray:
    """Labels = argmax of the frozen learner's logits (its classes only)."""
    logits = frozen_learner(batch).logits
    idx = logits.argmax(dim=1).cpu().numpy()
    classes = np.asarray(frozen_learner.known_classes, dtype=np.int64)
    return classes[idx]


class GenerativeReplayPlugin(MethodPlugin):
    kind = "gr"
    patience = 20

    def __init__(self, channels: int, length: int, seed: int,
                 latent_dim: int = 16, widths: tuple = (32, 64, 128, 256),
                 beta: float = 1.0, generator_epochs: int = 200,
                 generator_patience: int = 20, generator_lr: float = 1e-3,
                 batch_size: int = 64, replay_batch_size: int = 32):
        self.seed = seed
        self.generator = SeriesVAE(channels, length, latent_dim, widths, seed=seed, beta=beta)
        self.generator_epochs = generator_epochs
        self.generator_patience = generator_patience
        self.generator_lr = generator_lr
        self.batch_size = batch_size
        self.replay_batch_size = replay_batch_size
        self.frozen: Optional[FrozenPair] = None
        self._draws = 0

    def active(self, task_index: int) -> bool:
        return self.frozen is not None

    def replay_batch(self, task_index: int, n: int, new_batch: SampleSet = None, model=None):
        if self.frozen is None:
            return None
        pseudo = generate(self.frozen.generator, n, self.seed, task_index, self._draws)
        self._draws += 1
        labels = pseudo_label(self.frozen.learner, pseudo)
        return pseudo.numpy(), labels, None

    def end_of_task(self, model, task: Task) -> None:
        self._train_generator(task)
        self.frozen = FrozenPair(
            learner=freeze_copy(model),
            generator=freeze_copy(self.generator),
            task_index=task.index,
        )

    def _train_generator(self, task: Task) -> None:
        """Fit the VAE on real task data mixed 32+32 with frozen replay."""
        gen = self.generator
        gen.train()
        opt = torch.optim.Adam(gen.parameters(), lr=self.generator_lr)
        eps_gen = torch_generator(self.seed, "vae_train", task.index)
        order_rng = substream(self.seed, "vae_order", task.index)

        replaying = self.frozen is not None
        new_bs = self.replay_batch_size if replaying else self.batch_size

        best_val = np.inf
        best_state = {k: v.detach().clone() for k, v in gen.state_dict().items()}
        since_best = 0
        val_x = torch.from_numpy(task.val.values)
        draws = 0
        for epoch in range(1, self.generator_epochs + 1):
            perm = order_rng.permutation(len(task.train))
            for start in range(0, len(perm), new_bs):
                idx = perm[start : start + new_bs]
                x = torch.from_numpy(task.train.values[idx])
                if replaying:
                    pseudo = generate(self.frozen.generator, self.replay_batch_size,
                                      self.seed, "vae_replay", task.index, draws)
                    draws += 1
                    x = torch.cat([x, pseudo])
                if len(x) < 2:
                    continue
                opt.zero_grad()
                total, _, _ = vae_loss(gen, x, eps_gen)
                total.backward()
                opt.step()
            gen.eval()
            with torch.no_grad():
                val_total, _, _ = vae_loss(gen, val_x, torch_generator(self.seed, "vae_val", task.index, epoch))
            gen.train()
            if float(val_total) < best_val:
                best_val = float(val_total)
                best_state = {k: v.detach().clone() for k, v in gen.state_dict().items()}
                since_best = 0
            else:
                since_best += 1
                if since_best >= self.generator_patience:
                    break
        gen.load_state_dict(best_state)
        gen.eval()
