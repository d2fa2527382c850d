"""Exemplar selection policies against brute-force oracles."""

import numpy as np
import pytest

from timecil.data import SampleSet
from timecil.memory import (
    MemoryBuffer,
    clops_select,
    clops_update,
    fasticarl_select,
    fasticarl_update,
    herding_select,
    herding_update,
)


def oracle_herding(features, m):
    """Independent greedy re-implementation: rescan all candidates per step."""
    feats = np.asarray(features, dtype=np.float64)
    mu = feats.mean(axis=0)
    chosen = []
    for k in range(1, min(m, len(feats)) + 1):
        best_i, best_d = None, np.inf
        for i in range(len(feats)):
            if i in chosen:
                continue
            mean_k = (feats[chosen + [i]]).mean(axis=0) if chosen else feats[i]
            d = np.linalg.norm(mu - mean_k)
            if d < best_d:  # strict: ties keep the earlier index
                best_i, best_d = i, d
        chosen.append(best_i)
    return chosen


def oracle_fasticarl(features, m):
    """Full sort by distance to the mean, take the first m."""
    feats = np.asarray(features, dtype=np.float64)
    mu = feats.mean(axis=0)
    dist = np.linalg.norm(feats - mu, axis=1)
    return sorted(range(len(feats)), key=lambda i: (dist[i], i))[:m]


def class_set(features, labels=None, subjects=None):
    feats = np.asarray(features, dtype=np.float32)
    if feats.ndim == 1:
        feats = feats[:, None]
    values = feats[:, None, :]  # (n, 1, d) series of length d
    labels = np.zeros(len(feats), dtype=np.int64) if labels is None else labels
    return SampleSet(values, labels, subjects)


class TestHerdingSelect:
    def test_first_pick_is_nearest_to_mean(self):
        order = herding_select(np.array([[0.0], [1.0], [5.0]]), 1)
        assert order == [1]  # mean is 2, feature 1 is nearest

    def test_full_quota_returns_all_in_herding_order(self):
        feats = np.array([[0.0], [1.0], [5.0]])
        order = herding_select(feats, 3)
        assert sorted(order) == [0, 1, 2]
        assert order == oracle_herding(feats, 3)

    def test_matches_bruteforce_oracle_on_random_instances(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(2, 13))
            m = int(rng.integers(1, 6))
            feats = rng.standard_normal((n, int(rng.integers(1, 5))))
            assert herding_select(feats, m) == oracle_herding(feats, min(m, n))


class TestFastICARLSelect:
    def test_keeps_nearest_two(self):
        feats = np.array([[0.0], [1.0], [5.0]])  # mean 2: distances 2, 1, 3
        assert sorted(fasticarl_select(feats, 2)) == [0, 1]

    def test_m_at_least_n_keeps_all(self):
        feats = np.array([[0.0], [3.0]])
        assert sorted(fasticarl_select(feats, 10)) == [0, 1]

    def test_matches_sort_oracle_on_random_instances(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(2, 13))
            m = int(rng.integers(1, 6))
            feats = rng.standard_normal((n, int(rng.integers(1, 5))))
            assert set(fasticarl_select(feats, m)) == set(oracle_fasticarl(feats, min(m, n)))


class TestClopsSelect:
    def test_top_k_by_score(self):
        assert sorted(clops_select(np.array([0.9, 0.1, 0.5]), 2)) == [0, 2]

    def test_equal_scores_take_earliest(self):
        assert clops_select(np.array([0.5, 0.5, 0.5]), 2) == [0, 1]


class TestBufferUpdates:
    def features_fn(self, samples):
        return samples.values[:, 0, :]

    def test_herding_update_respects_quota(self):
        buf = MemoryBuffer(capacity=6)
        rng = np.random.default_rng(0)
        task1 = class_set(rng.standard_normal((20, 3)),
                          labels=np.repeat([0, 1], 10))
        herding_update(buf, task1, self.features_fn)
        assert len(buf) == 6
        by_class = buf.entries_by_class()
        assert {len(v) for v in by_class.values()} == {3}

    def test_old_classes_truncated_in_selection_order(self):
        buf = MemoryBuffer(capacity=6)
        rng = np.random.default_rng(1)
        task1 = class_set(rng.standard_normal((20, 3)), labels=np.repeat([0, 1], 10))
        herding_update(buf, task1, self.features_fn)
        first_two = {cls: [id(e) for e in entries[:2]]
                     for cls, entries in buf.entries_by_class().items()}
        task2 = class_set(rng.standard_normal((20, 3)), labels=np.repeat([2, 3], 10))
        herding_update(buf, task2, self.features_fn)
        by_class = buf.entries_by_class()
        assert {len(v) for v in by_class.values()} == {1}
        for cls in (0, 1):
            assert id(by_class[cls][0]) == first_two[cls][0]

    def test_fasticarl_update_matches_oracle_members(self):
        buf = MemoryBuffer(capacity=4)
        rng = np.random.default_rng(2)
        feats = rng.standard_normal((12, 3)).astype(np.float32)
        task = class_set(feats, labels=np.repeat([0, 1], 6))
        fasticarl_update(buf, task, self.features_fn)
        for cls in (0, 1):
            cls_feats = feats[cls * 6 : (cls + 1) * 6]
            expected = set(oracle_fasticarl(cls_feats, 2))
            got = {
                int(np.flatnonzero((cls_feats == e.sample.values[0]).all(axis=1))[0])
                for e in buf.entries_by_class()[cls]
            }
            assert got == expected

    def test_clops_update_keeps_high_scores(self):
        buf = MemoryBuffer(capacity=2)
        task = class_set(np.arange(6, dtype=np.float32), labels=np.repeat([0, 1], 3))
        scores = np.array([0.1, 0.9, 0.5, 0.2, 0.8, 0.3])
        clops_update(buf, task, scores, np.random.default_rng(0))
        values = sorted(float(e.sample.values[0, 0]) for e in buf.entries)
        assert values == [1.0, 4.0]  # per-class top scorers

    def test_clops_missing_scores_falls_back_to_reservoir(self):
        buf = MemoryBuffer(capacity=4)
        task = class_set(np.arange(10, dtype=np.float32))
        clops_update(buf, task, None, np.random.default_rng(0))
        assert len(buf) == 4
        assert buf.seen_count == 10

    def test_fewer_samples_than_quota_keeps_all(self):
        buf = MemoryBuffer(capacity=100)
        task = class_set(np.arange(4, dtype=np.float32), labels=np.array([0, 0, 1, 1]))
        herding_update(buf, task, self.features_fn)
        assert len(buf) == 4
