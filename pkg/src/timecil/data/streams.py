"""Seeded construction of class-incremental task streams."""

from __future__ import annotations

import logging

import numpy as np

from ..errors import ConfigError, ProtocolError
from ..seeding import substream
from .types import RawDataset, SampleSet, Task, TaskStream

log = logging.getLogger(__name__)

VAL_FRACTION = 0.1  # 1:9 val:train split inside each task


def _stratified_val_split(samples: SampleSet, seed: int, task_index: int) -> tuple[SampleSet, SampleSet]:
    """Split a task's training pool 1:9 val:train, stratified by class."""
    rng = substream(seed, "val_split", task_index)
    val_idx, train_idx = [], []
    for cls in np.unique(samples.labels):
        cls_idx = np.flatnonzero(samples.labels == cls)
        cls_idx = cls_idx[rng.permutation(len(cls_idx))]
        n_val = max(1, int(round(len(cls_idx) * VAL_FRACTION))) if len(cls_idx) > 1 else 0
        val_idx.append(cls_idx[:n_val])
        train_idx.append(cls_idx[n_val:])
    val_idx = np.sort(np.concatenate(val_idx)).astype(np.int64)
    train_idx = np.sort(np.concatenate(train_idx)).astype(np.int64)
    return samples.subset(train_idx), samples.subset(val_idx)


def make_task_stream(dataset: RawDataset, classes_per_task: int = 2, seed: int = 0) -> TaskStream:
    """Shuffle the class order by seed and partition it into equal tasks.

    Remainder classes (class_count not divisible by classes_per_task) are
    dropped from the tail of the shuffled order with a warning. Each task's
    training pool gets a stratified 1:9 val:train split.
    """
    if classes_per_task <= 0 or classes_per_task > dataset.class_count:
        raise ConfigError(
            f"classes_per_task={classes_per_task} invalid for {dataset.class_count} classes"
        )
    rng = substream(seed, "class_order")
    order = rng.permutation(dataset.class_count).tolist()
    n_tasks = dataset.class_count // classes_per_task
    dropped = dataset.class_count - n_tasks * classes_per_task
    if dropped:
        log.warning(
            "dropping %d remainder class(es) %s from the stream",
            dropped, order[n_tasks * classes_per_task:],
        )
        order = order[: n_tasks * classes_per_task]

    tasks = []
    for t in range(n_tasks):
        class_set = tuple(order[t * classes_per_task : (t + 1) * classes_per_task])
        train_mask = np.isin(dataset.train.labels, class_set)
        test_mask = np.isin(dataset.test.labels, class_set)
        pool = dataset.train.subset(np.flatnonzero(train_mask))
        train, val = _stratified_val_split(pool, seed, t)
        tasks.append(
            Task(
                class_set=class_set,
                train=train,
                val=val,
                test=dataset.test.subset(np.flatnonzero(test_mask)),
                index=t,
            )
        )
    return TaskStream(tasks=tasks, class_order=order, seed=seed, dataset_name=dataset.name)


def split_validation_stream(stream: TaskStream, n_val_tasks: int = 3) -> tuple[TaskStream, TaskStream]:
    """First n_val_tasks tasks become the tuning stream, the rest the experiment stream.

    Only meaningful for streams of more than 4 tasks; shorter streams should
    tune with the per-task grid-search protocol instead.
    """
    if len(stream) <= 4 or len(stream) <= n_val_tasks:
        raise ProtocolError(
            f"stream of {len(stream)} tasks is too short to reserve {n_val_tasks} "
            "validation tasks; use protocol A (per-task grid search)"
        )

    def reindex(tasks: list) -> list:
        return [
            Task(t.class_set, t.train, t.val, t.test, index=i)
            for i, t in enumerate(tasks)
        ]

    val = TaskStream(
        tasks=reindex(stream.tasks[:n_val_tasks]),
        class_order=[c for t in stream.tasks[:n_val_tasks] for c in t.class_set],
        seed=stream.seed,
        dataset_name=stream.dataset_name + "/validation",
    )
    exp = TaskStream(
        tasks=reindex(stream.tasks[n_val_tasks:]),
        class_order=[c for t in stream.tasks[n_val_tasks:] for c in t.class_set],
        seed=stream.seed,
        dataset_name=stream.dataset_name + "/experiment",
    )
    return val, exp
