"""Per-class exemplar selection policies under a global budget.

These policies re-partition the buffer each task: every class gets quota
m = floor(M / classes_seen), previously stored classes are truncated to
their first m selections (entry lists preserve selection order), and the
new task's classes are filled by the policy.
"""

from __future__ import annotations

import heapq
import logging
from typing import Callable, Optional

import numpy as np

from ..data.types import SampleSet
from .buffer import BufferEntry, MemoryBuffer

log = logging.getLogger(__name__)

FeatureFn = Callable[[SampleSet], np.ndarray]


def herding_select(features: np.ndarray, m: int) -> list:
    """Greedy mean-matching selection; returns indices in selection order.

    At step k the sample minimizing || mu - mean(selected + candidate) ||
    is added, mu being the class feature mean. Ties go to the lowest index.
    """
    n = len(features)
    m = min(m, n)
    feats = np.asarray(features, dtype=np.float64)
    mu = feats.mean(axis=0)
    chosen: list[int] = []
    running = np.zeros_like(mu)
    available = np.ones(n, dtype=bool)
    for k in range(1, m + 1):
        cand = (running[None, :] + feats) / k
        dist = np.linalg.norm(mu[None, :] - cand, axis=1)
        dist[~available] = np.inf
        pick = int(np.argmin(dist))  # first minimum = lowest index on ties
        chosen.append(pick)
        running += feats[pick]
        available[pick] = False
    return chosen


def fasticarl_select(features: np.ndarray, m: int) -> list:
    """Keep the m samples nearest the class feature mean.

    Single pass with a bounded max-heap over distances (O(n log m)); the
    result is returned sorted by distance ascending, ties by lowest index.
    """
    feats = np.asarray(features, dtype=np.float64)
    mu = feats.mean(axis=0)
    dist = np.linalg.norm(feats - mu[None, :], axis=1)
    if m >= len(feats):
        return sorted(range(len(feats)), key=lambda i: (dist[i], i))
    heap: list = []  # max-heap via negation; larger (-d, -i) = better keep
    for i, d in enumerate(dist):
        item = (-d, -i)
        if len(heap) < m:
            heapq.heappush(heap, item)
        elif item > heap[0]:
            heapq.heapreplace(heap, item)
    kept = sorted((-d, -negi) for d, negi in heap)
    return [i for _, i in kept]


def clops_select(scores: np.ndarray, m: int) -> list:
    """Indices of the m highest-importance samples, earliest-first on ties."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return order[:m]


def _rebuild_with_quota(buffer: MemoryBuffer, new_class_entries: dict) -> MemoryBuffer:
    """Re-quota every class to floor(M / classes_seen), keeping selection order."""
    groups = buffer.entries_by_class()
    groups.update(new_class_entries)
    if not groups or buffer.capacity <= 0:
        buffer.entries = []
        return buffer
    quota = buffer.capacity // len(groups)
    entries: list = []
    for cls in sorted(groups):
        entries.extend(groups[cls][:quota])
    buffer.entries = entries
    return buffer


def _class_indices(task_samples: SampleSet) -> dict:
    return {int(c): np.flatnonzero(task_samples.labels == c) for c in np.unique(task_samples.labels)}


def _policy_update(buffer: MemoryBuffer, task_samples: SampleSet, rank) -> MemoryBuffer:
    groups = _class_indices(task_samples)
    classes_seen = len(set(buffer.entries_by_class()) | set(groups))
    quota = buffer.capacity // max(1, classes_seen)
    new_entries: dict[int, list] = {}
    for cls, idx in groups.items():
        subset = task_samples.subset(idx)
        order = rank(subset, min(len(idx), quota))
        new_entries[cls] = [
            BufferEntry(subset.sample(i), insertion_index=buffer.seen_count + int(idx[i]))
            for i in order
        ]
    buffer.seen_count += len(task_samples)
    return _rebuild_with_quota(buffer, new_entries)


def herding_update(buffer: MemoryBuffer, task_samples: SampleSet,
                   features_fn: FeatureFn) -> MemoryBuffer:
    """Greedy mean-matching exemplars per new class, then global re-quota."""
    return _policy_update(
        buffer, task_samples, lambda subset, m: herding_select(features_fn(subset), m)
    )


def fasticarl_update(buffer: MemoryBuffer, task_samples: SampleSet,
                     features_fn: FeatureFn) -> MemoryBuffer:
    """Nearest-to-mean exemplars per new class via the bounded heap."""
    return _policy_update(
        buffer, task_samples, lambda subset, m: fasticarl_select(features_fn(subset), m)
    )


def clops_update(buffer: MemoryBuffer, task_samples: SampleSet,
                 importance_scores: Optional[np.ndarray],
                 rng: np.random.Generator) -> MemoryBuffer:
    """Keep the highest-importance samples per class; falls back to
    reservoir sampling when no scores were tracked."""
    if importance_scores is None or len(importance_scores) != len(task_samples):
        log.warning("clops: missing importance scores, falling back to reservoir update")
        from .buffer import reservoir_update

        return reservoir_update(
            buffer, (task_samples.sample(i) for i in range(len(task_samples))), rng
        )
    scores = np.asarray(importance_scores, dtype=np.float64)
    groups = _class_indices(task_samples)
    quota = buffer.capacity // max(1, len(set(buffer.entries_by_class()) | set(groups)))
    new_entries: dict[int, list] = {}
    for cls, idx in groups.items():
        order = clops_select(scores[idx], min(len(idx), quota))
        new_entries[cls] = [
            BufferEntry(
                task_samples.sample(int(idx[i])),
                score=float(scores[idx[i]]),
                insertion_index=buffer.seen_count + int(idx[i]),
            )
            for i in order
        ]
    buffer.seen_count += len(task_samples)
    return _rebuild_with_quota(buffer, new_entries)
