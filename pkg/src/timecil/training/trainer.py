"""Sequential task training with early stopping and replay plugins."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F

from ..data.types import SampleSet, Task, TaskStream
from ..errors import TrainingAborted
from ..eval.metrics import AccuracyMatrix
from ..methods.base import MethodPlugin, NaivePlugin, StepContext, batch_features
from ..models.backbone import BackboneConfig, IncrementalClassifier, build_model
from ..seeding import seed_torch_global, substream
from .early_stopping import EarlyStopper
from .logging import RunLogger
from .schedulers import make_scheduler


@dataclass
class TrainConfig:
    epochs_per_task: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 64          # per-step total, also the non-replay batch
    replay_batch_size: int = 32   # new-task half when a method replays
    scheduler: str = "step15"
    early_stop_patience: Optional[int] = None  # None -> the method's default
    seed: int = 0


def _per_sample_loss(model: IncrementalClassifier, logits: torch.Tensor,
                     labels: np.ndarray) -> torch.Tensor:
    target = model.map_labels(labels)
    kind = model.head.kind
    if kind == "sigmoid_bce":
        one_hot = F.one_hot(target, num_classes=logits.shape[1]).to(logits.dtype)
        return F.binary_cross_entropy_with_logits(logits, one_hot, reduction="none").sum(dim=1)
    # softmax_ce, split_cosine, and the NCM surrogate are all cross-entropy
    return F.cross_entropy(logits, target, reduction="none")


@torch.no_grad()
def evaluate_loss(model: IncrementalClassifier, samples: SampleSet,
                  batch_size: int = 256) -> float:
    was_training = model.training
    model.eval()
    total, count = 0.0, 0
    for start in range(0, len(samples), batch_size):
        x = torch.from_numpy(samples.values[start : start + batch_size])
        logits = model(x).logits
        losses = _per_sample_loss(model, logits, samples.labels[start : start + batch_size])
        total += float(losses.sum())
        count += len(losses)
    if was_training:
        model.train()
    return total / max(1, count)


@torch.no_grad()
def evaluate_accuracy(model: IncrementalClassifier, samples: SampleSet,
                      batch_size: int = 256) -> float:
    was_training = model.training
    model.eval()
    correct = 0
    for start in range(0, len(samples), batch_size):
        x = torch.from_numpy(samples.values[start : start + batch_size])
        pred = model.predict(x)
        correct += int((pred == samples.labels[start : start + batch_size]).sum())
    if was_training:
        model.train()
    return correct / max(1, len(samples))


def train_task(model: IncrementalClassifier, task: Task, plugin: MethodPlugin,
               cfg: TrainConfig, logger: Optional[RunLogger] = None) -> IncrementalClassifier:
    """Optimize one task to convergence and run the plugin's end-of-task hook.

    The model head must already cover task.class_set. Early stopping watches
    the task's own validation split and restores the best snapshot before
    the end-of-task update.
    """
    logger = logger or RunLogger()
    seed_torch_global(cfg.seed, "task_train", task.index)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    schedule = make_scheduler(cfg.scheduler, cfg.learning_rate, cfg.epochs_per_task)
    patience = cfg.early_stop_patience if cfg.early_stop_patience else plugin.patience
    stopper = EarlyStopper(patience)
    order_rng = substream(cfg.seed, "batch_order", task.index)

    replaying = plugin.active(task.index)
    new_bs = cfg.replay_batch_size if replaying else cfg.batch_size
    train = task.train
    lr = cfg.learning_rate

    for epoch in range(1, cfg.epochs_per_task + 1):
        lr = schedule(epoch)
        for group in optimizer.param_groups:
            group["lr"] = lr
        model.train()
        perm = order_rng.permutation(len(train))
        epoch_losses = []
        for start in range(0, len(perm), new_bs):
            idx = perm[start : start + new_bs]
            x_new = torch.from_numpy(train.values[idx])
            y_new = train.labels[idx]
            replay = None
            if replaying:
                new_view = train.subset(idx)
                replay = plugin.replay_batch(task.index, cfg.replay_batch_size,
                                             new_batch=new_view, model=model)
            if replay is not None:
                x_mem, y_mem, entries = replay
                x = torch.cat([x_new, torch.as_tensor(x_mem, dtype=torch.float32)])
                labels = np.concatenate([y_new, y_mem])
            else:
                x, labels, entries = x_new, y_new, None
            if len(x) < 2:
                continue  # a lone sample breaks batch statistics

            optimizer.zero_grad()
            result = model(x)
            losses = _per_sample_loss(model, result.logits, labels)
            base = losses.mean()
            ctx = StepContext(
                model=model, result=result, x_new=x_new, y_new=y_new,
                n_new=len(idx), new_indices=idx,
                new_losses=losses[: len(idx)].detach(),
                task_index=task.index, replay_entries=entries,
            )
            total = base + plugin.extra_loss(ctx)
            if not torch.isfinite(total):
                raise TrainingAborted(
                    f"non-finite loss at task {task.index} epoch {epoch} "
                    f"(method={plugin.kind}, lr={lr})"
                )
            total.backward()
            optimizer.step()
            loss_value = float(total)
            epoch_losses.append(loss_value)
            logger.log_step(loss_value)

        val_loss = evaluate_loss(model, task.val)
        logger.log(task=task.index, epoch=epoch, lr=lr,
                   train_loss=float(np.mean(epoch_losses)) if epoch_losses else None,
                   val_loss=val_loss)
        if stopper.update(val_loss, model, epoch):
            logger.log(task=task.index, event="early_stop", epoch=epoch,
                       best_epoch=stopper.best_epoch, best_val_loss=stopper.best_val_loss)
            break

    stopper.restore_best(model)
    logger.log(task=task.index, event="restored_best", best_epoch=stopper.best_epoch,
               best_val_loss=stopper.best_val_loss)
    plugin.end_of_task(model, task)
    return model


def _refresh_ncm_prototypes(model: IncrementalClassifier, plugin: MethodPlugin) -> None:
    """Prototypes = per-class mean features of the memory samples."""
    buffer = getattr(plugin, "buffer", None)
    if buffer is None or len(buffer) == 0:
        return
    mem = buffer.as_sample_set()
    feats = batch_features(model, mem)
    for cls in np.unique(mem.labels):
        model.head.prototypes[int(cls)] = feats[mem.labels == cls].mean(axis=0)


def run_stream(stream: TaskStream, plugin: MethodPlugin, cfg: TrainConfig,
               backbone: Optional[BackboneConfig] = None, head_kind: str = "softmax_ce",
               logger: Optional[RunLogger] = None, return_state: bool = False):
    """Train the stream sequentially and fill the lower-triangular matrix.

    After each task the model is evaluated on the test sets of every task
    learned so far, classifying over all known classes with no task id.
    With return_state the trained model and plugin come back too.
    """
    logger = logger or RunLogger()
    backbone = backbone or BackboneConfig()
    channels, length = stream.sample_shape
    model = build_model(channels, length, backbone, [], seed=cfg.seed, head_kind=head_kind)
    matrix = AccuracyMatrix.empty(len(stream))
    for task in stream.tasks:
        model.expand_head(task.class_set)
        train_task(model, task, plugin, cfg, logger)
        if head_kind == "ncm":
            _refresh_ncm_prototypes(model, plugin)
        for j in range(task.index + 1):
            acc = evaluate_accuracy(model, stream.tasks[j].test)
            matrix.set(task.index + 1, j + 1, acc)
    if return_state:
        return matrix, model, plugin
    return matrix


def run_offline(stream: TaskStream, cfg: TrainConfig,
                backbone: Optional[BackboneConfig] = None, head_kind: str = "softmax_ce",
                logger: Optional[RunLogger] = None) -> AccuracyMatrix:
    """Joint-training upper bound: one pass over the union of all task data.

    Only the final matrix row is defined; forgetting and learning accuracy
    do not apply.
    """
    logger = logger or RunLogger()
    backbone = backbone or BackboneConfig()
    channels, length = stream.sample_shape
    all_classes = [c for task in stream.tasks for c in task.class_set]
    merged = Task(
        class_set=tuple(all_classes),
        train=SampleSet.concat([t.train for t in stream.tasks]),
        val=SampleSet.concat([t.val for t in stream.tasks]),
        test=SampleSet.concat([t.test for t in stream.tasks]),
        index=0,
    )
    model = build_model(channels, length, backbone, [], seed=cfg.seed, head_kind=head_kind)
    model.expand_head(merged.class_set)
    train_task(model, merged, NaivePlugin(), cfg, logger)
    t = len(stream)
    matrix = AccuracyMatrix.empty(t, joint=True)
    for j, task in enumerate(stream.tasks):
        matrix.set(t, j + 1, evaluate_accuracy(model, task.test))
    return matrix
