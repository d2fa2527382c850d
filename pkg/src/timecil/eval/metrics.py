"""Accuracy matrices and the three summary metrics derived from them.

a[i][j] is the accuracy on task j's test set right after training task i
(both 1-based in the public API, j <= i). All metrics are pure functions
of the defined lower-triangular entries.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ContractError, UndefinedMetricError


@dataclass
class AccuracyMatrix:
    """Lower-triangular accuracy record of one run.

    ``joint`` marks the offline baseline, where only the final row is
    defined (a single joint training pass, evaluated on every test set).
    """

    values: np.ndarray  # (T, T) float64, NaN above the diagonal / undefined
    joint: bool = False

    @classmethod
    def empty(cls, n_tasks: int, joint: bool = False) -> "AccuracyMatrix":
        return cls(np.full((n_tasks, n_tasks), np.nan), joint=joint)

    @property
    def n_tasks(self) -> int:
        return self.values.shape[0]

    def set(self, i: int, j: int, acc: float) -> None:
        """Record a[i][j] (1-based, j <= i)."""
        if not 1 <= j <= i <= self.n_tasks:
            raise ContractError(f"matrix entry ({i}, {j}) outside the lower triangle")
        if not 0.0 <= acc <= 1.0:
            raise ContractError(f"accuracy {acc} outside [0, 1]")
        self.values[i - 1, j - 1] = acc

    def get(self, i: int, j: int) -> float:
        v = self.values[i - 1, j - 1]
        if math.isnan(v):
            raise ContractError(f"matrix entry ({i}, {j}) was never recorded")
        return float(v)

    def row(self, i: int) -> np.ndarray:
        return self.values[i - 1, :i]

    def is_complete(self) -> bool:
        tri = np.tril_indices(self.n_tasks)
        return not np.isnan(self.values[tri]).any()

    def to_csv(self, path) -> None:
        """Header task_1..task_T, one row per trained task, empty undefined cells."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"task_{j}" for j in range(1, self.n_tasks + 1)])
            for i in range(self.n_tasks):
                writer.writerow(
                    ["" if math.isnan(v) else f"{v:.6f}" for v in self.values[i]]
                )

    @classmethod
    def from_csv(cls, path, joint: bool = False) -> "AccuracyMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        data = rows[1:]
        values = np.full((len(data), len(data)), np.nan)
        for i, row in enumerate(data):
            for j, cell in enumerate(row):
                if cell != "":
                    values[i, j] = float(cell)
        return cls(values, joint=joint)


def avg_accuracy(matrix: AccuracyMatrix, i: int) -> float:
    """Mean accuracy over the test sets of tasks 1..i after training task i."""
    if not 1 <= i <= matrix.n_tasks:
        raise ContractError(f"task index {i} outside 1..{matrix.n_tasks}")
    row = matrix.row(i)
    if np.isnan(row).any():
        raise ContractError(f"row {i} has unrecorded entries")
    return float(row.mean())


def avg_forgetting(matrix: AccuracyMatrix, i: int) -> float:
    """Mean over j < i of max_{k<i} a[k][j] - a[i][j]; undefined for i = 1."""
    if i < 2:
        raise UndefinedMetricError("forgetting is undefined after a single task")
    if not i <= matrix.n_tasks:
        raise ContractError(f"task index {i} outside 1..{matrix.n_tasks}")
    total = 0.0
    for j in range(1, i):
        past = [matrix.get(k, j) for k in range(j, i)]
        total += max(past) - matrix.get(i, j)
    return total / (i - 1)


def avg_learning_accuracy(matrix: AccuracyMatrix) -> float:
    """Mean of the diagonal a[i][i]: accuracy on each task as it was learned."""
    diag = np.diag(matrix.values)
    if np.isnan(diag).any():
        raise ContractError("diagonal has unrecorded entries")
    return float(diag.mean())


@dataclass
class RunMetrics:
    """Metric triple of one finished run, plus the accuracy evolution curve."""

    a_t: float
    f_t: Optional[float]
    a_cur: Optional[float]
    a_curve: list = field(default_factory=list)
    n_tasks: int = 0

    @classmethod
    def from_matrix(cls, matrix: AccuracyMatrix) -> "RunMetrics":
        t = matrix.n_tasks
        if matrix.joint:
            return cls(a_t=avg_accuracy(matrix, t), f_t=None, a_cur=None, a_curve=[], n_tasks=t)
        curve = [avg_accuracy(matrix, i) for i in range(1, t + 1)]
        f_t = avg_forgetting(matrix, t) if t >= 2 else None
        return cls(a_t=curve[-1], f_t=f_t, a_cur=avg_learning_accuracy(matrix),
                   a_curve=curve, n_tasks=t)

    def to_dict(self) -> dict:
        return {"A_T": self.a_t, "F_T": self.f_t, "A_cur": self.a_cur,
                "A_curve": self.a_curve, "T": self.n_tasks}


def mean_confidence_interval(values, confidence: float = 0.95) -> tuple[float, Optional[float]]:
    """(mean, half-width of the Student-t CI); half-width absent for < 2 runs."""
    arr = np.asarray([v for v in values if v is not None], dtype=np.float64)
    if arr.size == 0:
        raise ContractError("no values to aggregate")
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, None
    from scipy import stats

    sem = arr.std(ddof=1) / np.sqrt(arr.size)
    half = float(stats.t.ppf(0.5 + confidence / 2.0, df=arr.size - 1) * sem)
    return mean, half
