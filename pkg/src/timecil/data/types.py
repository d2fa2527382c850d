"""Core data containers: samples, datasets, tasks, and task streams."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import ValidationError


@dataclass
class TimeSeriesSample:
    """One labeled multichannel series.

    values has shape (channels, length), float32, finite. subject is the
    recording subject id when the dataset carries one.
    """

    values: np.ndarray
    label: int
    subject: Optional[int] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValidationError(f"sample values must be 2-D (C, L), got shape {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise ValidationError("sample values contain NaN/Inf")


@dataclass
class SampleSet:
    """Array-backed batch of samples sharing one (C, L) shape.

    values: (n, C, L) float32; labels: (n,) int64; subjects: (n,) int64 or None.
    """

    values: np.ndarray
    labels: np.ndarray
    subjects: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.subjects is not None:
            self.subjects = np.asarray(self.subjects, dtype=np.int64)
        if self.values.ndim != 3:
            raise ValidationError(f"SampleSet values must be (n, C, L), got {self.values.shape}")
        if len(self.labels) != len(self.values):
            raise ValidationError("labels length does not match values")
        if self.subjects is not None and len(self.subjects) != len(self.values):
            raise ValidationError("subjects length does not match values")
        if not np.isfinite(self.values).all():
            raise ValidationError("sample values contain NaN/Inf")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def shape(self) -> tuple[int, int]:
        """Per-sample (C, L)."""
        return self.values.shape[1], self.values.shape[2]

    def subset(self, idx) -> "SampleSet":
        idx = np.asarray(idx)
        return SampleSet(
            self.values[idx],
            self.labels[idx],
            None if self.subjects is None else self.subjects[idx],
        )

    def sample(self, i: int) -> TimeSeriesSample:
        subj = None if self.subjects is None else int(self.subjects[i])
        return TimeSeriesSample(self.values[i], int(self.labels[i]), subj)

    @staticmethod
    def concat(parts: Sequence["SampleSet"]) -> "SampleSet":
        parts = list(parts)
        if not parts:
            raise ValidationError("cannot concat zero SampleSets")
        subj = None
        if all(p.subjects is not None for p in parts):
            subj = np.concatenate([p.subjects for p in parts])
        return SampleSet(
            np.concatenate([p.values for p in parts]),
            np.concatenate([p.labels for p in parts]),
            subj,
        )

    @staticmethod
    def empty(channels: int, length: int) -> "SampleSet":
        return SampleSet(
            np.zeros((0, channels, length), dtype=np.float32),
            np.zeros((0,), dtype=np.int64),
            np.zeros((0,), dtype=np.int64),
        )


@dataclass
class RawDataset:
    """A full dataset with its published (or generated) train/test partition."""

    name: str
    train: SampleSet
    test: SampleSet
    class_count: int

    def validate(self, balance_ratio: float = 1.5) -> None:
        """raises ValidationError when shape/balance/coverage invariants fail."""
        if self.train.shape != self.test.shape:
            raise ValidationError(
                f"{self.name}: train shape {self.train.shape} != test shape {self.test.shape}"
            )
        train_classes = set(np.unique(self.train.labels).tolist())
        test_classes = set(np.unique(self.test.labels).tolist())
        expected = set(range(self.class_count))
        if train_classes != expected or test_classes != expected:
            raise ValidationError(
                f"{self.name}: train/test must both contain classes 0..{self.class_count - 1}"
            )
        counts = np.bincount(self.train.labels, minlength=self.class_count)
        if counts.min() > 0 and counts.max() / counts.min() > balance_ratio:
            raise ValidationError(
                f"{self.name}: train class imbalance {counts.max()}/{counts.min()} "
                f"exceeds ratio {balance_ratio}"
            )
        if self.train.subjects is not None and self.test.subjects is not None:
            train_subj = set(np.unique(self.train.subjects).tolist())
            test_subj = set(np.unique(self.test.subjects).tolist())
            if train_subj != test_subj:
                raise ValidationError(f"{self.name}: train and test subject sets differ")

    @property
    def shape(self) -> tuple[int, int]:
        return self.train.shape


@dataclass
class Task:
    """One stream position: disjoint class set plus train/val/test partitions."""

    class_set: tuple
    train: SampleSet
    val: SampleSet
    test: SampleSet
    index: int  # 0-based position in the stream


@dataclass
class TaskStream:
    """Ordered class-incremental tasks built from one dataset and seed."""

    tasks: list
    class_order: list
    seed: int
    dataset_name: str = ""

    def __len__(self) -> int:
        return len(self.tasks)

    @property
    def all_classes(self) -> set:
        out: set = set()
        for t in self.tasks:
            out |= set(t.class_set)
        return out

    @property
    def train_size(self) -> int:
        """Total training samples over the stream (excludes val splits)."""
        return sum(len(t.train) for t in self.tasks)

    @property
    def subjects(self) -> list:
        subj: set = set()
        for t in self.tasks:
            if t.train.subjects is not None:
                subj |= set(np.unique(t.train.subjects).tolist())
        return sorted(subj)

    @property
    def sample_shape(self) -> tuple[int, int]:
        return self.tasks[0].train.shape
