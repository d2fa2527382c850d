"""Replay buffer: reservoir statistics, retrieval policies, capacity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from timecil.data import SampleSet, SyntheticConfig, TimeSeriesSample, make_synthetic_dataset, make_task_stream
from timecil.errors import ConfigError
from timecil.memory import (
    MemoryBuffer,
    SubjectBalancedRetriever,
    budget_from_fraction,
    random_retrieve,
    reservoir_update,
    subject_balanced_retrieve,
    subject_restricted_update,
)


def make_samples(n, label=0, subject=None, start=0):
    return [
        TimeSeriesSample(np.full((1, 4), float(start + i), dtype=np.float32), label,
                         subject if subject is None else int(subject))
        for i in range(n)
    ]


def sample_ids(buffer):
    return sorted(int(e.sample.values[0, 0]) for e in buffer.entries)


class TestBudget:
    def test_five_percent_of_uci_har_sized_stream(self):
        ds = make_synthetic_dataset(SyntheticConfig(n_classes=4, train_per_class=100,
                                                    channels=1, length=16, seed=0))
        stream = make_task_stream(ds, 2, seed=0)
        # 1:9 val split leaves 90 per class in task train pools
        assert stream.train_size == 360
        assert budget_from_fraction(stream, 0.05) == 18

    def test_full_fraction_is_whole_train_size(self, tiny_stream):
        assert budget_from_fraction(tiny_stream, 1.0) == tiny_stream.train_size

    def test_tiny_fraction_floors_to_one(self, tiny_stream):
        assert budget_from_fraction(tiny_stream, 1e-6) == 1

    def test_out_of_range(self, tiny_stream):
        with pytest.raises(ConfigError):
            budget_from_fraction(tiny_stream, 0.0)
        with pytest.raises(ConfigError):
            budget_from_fraction(tiny_stream, 1.5)


class TestReservoir:
    def test_fill_phase_keeps_everything(self):
        buf = MemoryBuffer(capacity=10)
        reservoir_update(buf, make_samples(10), np.random.default_rng(0))
        assert len(buf) == 10 and buf.seen_count == 10

    def test_zero_capacity_stays_empty(self):
        buf = MemoryBuffer(capacity=0)
        reservoir_update(buf, make_samples(100), np.random.default_rng(0))
        assert len(buf) == 0 and buf.seen_count == 100

    def test_capacity_never_exceeded(self):
        buf = MemoryBuffer(capacity=7)
        rng = np.random.default_rng(1)
        for chunk in range(20):
            reservoir_update(buf, make_samples(13, start=chunk * 13), rng)
            assert len(buf) <= 7
        assert buf.seen_count == 260

    def test_retention_uniformity_chi2(self):
        # 2000 simulated streams of n=400 into M=40: every position should
        # be retained with probability M/n
        n, m, streams = 400, 40, 2000
        counts = np.zeros(n)
        rng = np.random.default_rng(7)
        for _ in range(streams):
            buf = MemoryBuffer(capacity=m)
            reservoir_update(buf, make_samples(n), rng)
            for e in buf.entries:
                counts[e.insertion_index] += 1
        expected = streams * m / n
        chi2 = ((counts - expected) ** 2 / expected).sum()
        p = stats.chi2.sf(chi2, df=n - 1)
        assert p > 0.01


class TestRandomRetrieve:
    def test_small_buffer_oversampled_with_replacement(self):
        buf = MemoryBuffer(capacity=5)
        reservoir_update(buf, make_samples(5), np.random.default_rng(0))
        batch = random_retrieve(buf, 32, np.random.default_rng(1))
        assert len(batch) == 32

    def test_empty_buffer_gives_empty_batch(self):
        assert random_retrieve(MemoryBuffer(capacity=5), 32, np.random.default_rng(0)) == []

    def test_without_replacement_when_large_enough(self):
        buf = MemoryBuffer(capacity=50)
        reservoir_update(buf, make_samples(50), np.random.default_rng(0))
        batch = random_retrieve(buf, 20, np.random.default_rng(1))
        ids = [int(e.sample.values[0, 0]) for e in batch]
        assert len(set(ids)) == 20

    def test_frequency_uniform_chi2(self):
        buf = MemoryBuffer(capacity=100)
        reservoir_update(buf, make_samples(100), np.random.default_rng(0))
        rng = np.random.default_rng(3)
        counts = np.zeros(100)
        draws, k = 10_000, 10
        for _ in range(draws):
            for e in random_retrieve(buf, k, rng):
                counts[e.insertion_index] += 1
        expected = draws * k / 100
        chi2 = ((counts - expected) ** 2 / expected).sum()
        assert stats.chi2.sf(chi2, df=99) > 0.01


class TestSubjectBalanced:
    def full_buffer(self, per_subject=20, subjects=4):
        buf = MemoryBuffer(capacity=per_subject * subjects)
        rng = np.random.default_rng(0)
        for s in range(subjects):
            reservoir_update(buf, make_samples(per_subject, subject=s, start=100 * s), rng)
        return buf

    def test_even_quota(self):
        buf = self.full_buffer()
        batch = subject_balanced_retrieve(buf, 8, np.random.default_rng(1))
        per_subject = np.bincount([e.sample.subject for e in batch], minlength=4)
        assert per_subject.tolist() == [2, 2, 2, 2]

    def test_remainder_rotates(self):
        buf = self.full_buffer()
        retriever = SubjectBalancedRetriever()
        rng = np.random.default_rng(2)
        first = np.bincount([e.sample.subject for e in retriever(buf, 5, rng)], minlength=4)
        second = np.bincount([e.sample.subject for e in retriever(buf, 5, rng)], minlength=4)
        assert sorted(first.tolist()) == [1, 1, 1, 2]
        assert first.argmax() != second.argmax()

    def test_batch_counts_differ_by_at_most_one(self):
        buf = self.full_buffer(subjects=3)
        rng = np.random.default_rng(3)
        retriever = SubjectBalancedRetriever()
        for k in (3, 5, 7, 9, 10):
            counts = np.bincount([e.sample.subject for e in retriever(buf, k, rng)], minlength=3)
            assert counts.max() - counts.min() <= 1

    def test_longrun_frequencies_uniform(self):
        buf = self.full_buffer(subjects=4)
        retriever = SubjectBalancedRetriever()
        rng = np.random.default_rng(4)
        totals = np.zeros(4)
        draws, k = 10_000, 5
        for _ in range(draws):
            for e in retriever(buf, k, rng):
                totals[e.sample.subject] += 1
        freqs = totals / totals.sum()
        np.testing.assert_allclose(freqs, 0.25, atol=0.01)

    def test_missing_subjects_falls_back_to_random(self):
        buf = MemoryBuffer(capacity=10)
        reservoir_update(buf, make_samples(10, subject=None), np.random.default_rng(0))
        batch = subject_balanced_retrieve(buf, 4, np.random.default_rng(1))
        assert len(batch) == 4


class TestSubjectRestricted:
    def test_allowed_everything_matches_reservoir(self):
        samples = make_samples(50, subject=0) + make_samples(50, subject=1, start=50)
        a = MemoryBuffer(capacity=20)
        b = MemoryBuffer(capacity=20)
        subject_restricted_update(a, samples, {0, 1}, np.random.default_rng(5))
        reservoir_update(b, samples, np.random.default_rng(5))
        assert sample_ids(a) == sample_ids(b)

    def test_only_allowed_subjects_stored(self):
        buf = MemoryBuffer(capacity=30)
        samples = make_samples(40, subject=0) + make_samples(40, subject=1, start=100)
        subject_restricted_update(buf, samples, {1}, np.random.default_rng(6))
        assert all(e.sample.subject == 1 for e in buf.entries)

    def test_no_allowed_samples_is_noop(self):
        buf = MemoryBuffer(capacity=5)
        subject_restricted_update(buf, make_samples(10, subject=0), {3}, np.random.default_rng(0))
        assert len(buf) == 0 and buf.seen_count == 0

    def test_empty_allowed_set_rejected(self):
        with pytest.raises(ConfigError):
            subject_restricted_update(MemoryBuffer(5), make_samples(3, subject=0), set(),
                                      np.random.default_rng(0))


class TestCapacityProperty:
    @given(st.lists(st.tuples(st.sampled_from(["add", "retrieve"]),
                              st.integers(min_value=1, max_value=30)), max_size=25),
           st.integers(min_value=0, max_value=12))
    @settings(max_examples=50, deadline=None)
    def test_capacity_invariant_under_op_sequences(self, ops, capacity):
        buf = MemoryBuffer(capacity=capacity)
        rng = np.random.default_rng(0)
        start = 0
        for op, n in ops:
            if op == "add":
                reservoir_update(buf, make_samples(n, start=start), rng)
                start += n
            else:
                random_retrieve(buf, n, rng)
            assert len(buf) <= capacity
            assert buf.seen_count == start


class TestExport:
    def test_snapshot_manifest(self, tmp_path):
        import json

        buf = MemoryBuffer(capacity=8)
        reservoir_update(buf, make_samples(20, label=3, subject=1), np.random.default_rng(0))
        path = tmp_path / "buffer.npz"
        buf.export(path)
        with np.load(path) as z:
            manifest = json.loads(bytes(z["manifest"]).decode())
            assert manifest["M"] == 8
            assert manifest["seen_count"] == 20
            assert z["values"].shape[0] == len(buf)
