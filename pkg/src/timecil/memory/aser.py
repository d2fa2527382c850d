"""Shapley-value scored memory retrieval.

Buffer entries are scored by the exact closed-form Shapley values of a
K-nearest-neighbor utility (Jia et al.'s sorted recursion): cooperative
value with respect to held-out buffer points minus adversarial value with
respect to the incoming batch. The retrieved batch is the top-k by score.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..data.types import SampleSet
from .buffer import MemoryBuffer

DEFAULT_K_NEIGHBORS = 5
DEFAULT_EVAL_POINTS = 64


def knn_shapley(candidate_feats: np.ndarray, candidate_labels: np.ndarray,
                eval_feat: np.ndarray, eval_label: int, k: int) -> np.ndarray:
    """Exact Shapley values of the KNN utility for one evaluation point.

    The utility of a candidate subset S is (1/k) * sum of label matches
    over the min(k, |S|) candidates nearest the evaluation point. With
    candidates sorted by distance ascending as a_1..a_N the values obey

        s(a_N) = 1[y_N = y] / N
        s(a_i) = s(a_{i+1}) + (1[y_i = y] - 1[y_{i+1} = y]) * min(k, i) / (k * i)

    Ties in distance are broken by candidate index (stable sort).
    """
    feats = np.asarray(candidate_feats, dtype=np.float64)
    n = len(feats)
    dist = np.linalg.norm(feats - np.asarray(eval_feat, dtype=np.float64)[None, :], axis=1)
    order = np.argsort(dist, kind="stable")
    match = (np.asarray(candidate_labels)[order] == eval_label).astype(np.float64)

    s_sorted = np.empty(n, dtype=np.float64)
    s_sorted[n - 1] = match[n - 1] / n
    for i in range(n - 2, -1, -1):
        rank = i + 1  # 1-based position in the sorted order
        s_sorted[i] = s_sorted[i + 1] + (match[i] - match[i + 1]) * min(k, rank) / (k * rank)
    values = np.empty(n, dtype=np.float64)
    values[order] = s_sorted
    return values


def _mean_shapley(candidate_feats, candidate_labels, eval_feats, eval_labels, k) -> np.ndarray:
    total = np.zeros(len(candidate_feats), dtype=np.float64)
    for feat, label in zip(eval_feats, eval_labels):
        total += knn_shapley(candidate_feats, candidate_labels, feat, int(label), k)
    return total / max(1, len(eval_feats))


def aser_retrieve(buffer: MemoryBuffer, new_batch: SampleSet, k: int,
                  features_fn: Callable[[SampleSet], np.ndarray],
                  rng: np.random.Generator,
                  k_neighbors: int = DEFAULT_K_NEIGHBORS,
                  n_eval_points: int = DEFAULT_EVAL_POINTS) -> list:
    """Top-k buffer entries by cooperative-minus-adversarial Shapley score.

    Cooperative: mean KNN-Shapley value against a random sub-sample of
    buffer entries. Adversarial: the same against the incoming batch. Ties
    resolve by insertion index; with k or fewer entries, all are returned.
    """
    n = len(buffer.entries)
    if n == 0:
        return []
    if n <= k:
        return list(buffer.entries)

    mem = buffer.as_sample_set()
    mem_feats = np.asarray(features_fn(mem), dtype=np.float64)
    mem_labels = mem.labels

    n_eval = min(n_eval_points, n)
    eval_idx = rng.choice(n, size=n_eval, replace=False)
    coop = _mean_shapley(mem_feats, mem_labels, mem_feats[eval_idx], mem_labels[eval_idx], k_neighbors)

    new_feats = np.asarray(features_fn(new_batch), dtype=np.float64)
    adv = _mean_shapley(mem_feats, mem_labels, new_feats, new_batch.labels, k_neighbors)

    score = coop - adv
    ranked = sorted(
        range(n), key=lambda i: (-score[i], buffer.entries[i].insertion_index)
    )
    return [buffer.entries[i] for i in ranked[:k]]
