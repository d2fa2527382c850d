"""Dataset generation, preprocessing, and stream construction contracts."""

import numpy as np
import pytest

from timecil.data import (
    Recording,
    SampleSet,
    SyntheticConfig,
    cut_windows,
    load_dataset,
    load_dataset_cache,
    make_synthetic_dataset,
    make_task_stream,
    preprocess_grabmyo,
    preprocess_wisdm,
    preprocessing_hash,
    save_dataset_cache,
    split_validation_stream,
)
from timecil.errors import ConfigError, DatasetLoadError, ProtocolError, ValidationError


class TestSynthetic:
    def test_balanced_and_deterministic(self):
        cfg = SyntheticConfig(n_classes=6, n_subjects=4, seed=42)
        a = make_synthetic_dataset(cfg)
        b = make_synthetic_dataset(cfg)
        assert a.shape == (9, 128)
        counts = np.bincount(a.train.labels)
        assert counts.min() == counts.max() == cfg.train_per_class
        np.testing.assert_array_equal(a.train.values, b.train.values)
        np.testing.assert_array_equal(a.test.labels, b.test.labels)

    def test_different_seed_changes_data(self):
        a = make_synthetic_dataset(SyntheticConfig(seed=1))
        b = make_synthetic_dataset(SyntheticConfig(seed=2))
        assert not np.array_equal(a.train.values, b.train.values)

    def test_every_class_subject_pair_in_both_splits(self):
        ds = make_synthetic_dataset(SyntheticConfig(n_classes=4, n_subjects=3, seed=0))
        for split in (ds.train, ds.test):
            pairs = {(int(c), int(s)) for c, s in zip(split.labels, split.subjects)}
            assert pairs == {(c, s) for c in range(4) for s in range(3)}

    def test_values_finite(self, tiny_dataset):
        assert np.isfinite(tiny_dataset.train.values).all()


class TestWindowing:
    def test_five_second_recording_gives_ten_windows(self):
        rng = np.random.default_rng(0)
        rec = Recording(subject=0, label=0, signal=rng.standard_normal((28, 5 * 2048)))
        train, test, skipped = preprocess_grabmyo([rec])
        assert skipped == 0
        assert len(train) + len(test) == 10
        assert train.shape == (28, 128)

    def test_short_recording_skipped_with_count(self):
        rng = np.random.default_rng(1)
        short = Recording(subject=0, label=0, signal=rng.standard_normal((28, int(0.4 * 2048))))
        ok = Recording(subject=0, label=1, signal=rng.standard_normal((28, 5 * 2048)))
        train, test, skipped = preprocess_grabmyo([short, ok])
        assert skipped == 1
        assert len(train) + len(test) == 10

    def test_decimation_factor_is_eight(self):
        from timecil.data.preprocess import GRABMYO_RAW_RATE, GRABMYO_TARGET_RATE

        assert GRABMYO_RAW_RATE // GRABMYO_TARGET_RATE == 8

    def test_wisdm_sixty_seconds_gives_six_windows(self):
        rng = np.random.default_rng(2)
        rec = Recording(subject=3, label=2, signal=rng.standard_normal((3, 1200)))
        train, test, _ = preprocess_wisdm([rec])
        assert len(train) + len(test) == 6
        assert train.shape == (3, 200)

    def test_split_ratio_three_to_one(self):
        rng = np.random.default_rng(3)
        recs = [
            Recording(subject=s, label=0, signal=rng.standard_normal((3, 200 * 40)))
            for s in range(4)
        ]
        train, test, _ = preprocess_wisdm(recs)
        assert len(train) == 3 * len(test)
        assert set(np.unique(train.subjects)) == set(np.unique(test.subjects)) == set(range(4))

    def test_window_conservation(self):
        rng = np.random.default_rng(4)
        lengths = [150, 512, 75, 1024, 199]
        recs = [Recording(subject=0, label=0, signal=rng.standard_normal((2, n))) for n in lengths]
        total = 0
        for rec in recs:
            total += rec.signal.shape[1] // 100
        windows = sum(len(cut_windows(r.signal, 100)) for r in recs)
        assert windows == total


class TestTaskStream:
    def test_uci_har_shape_gives_three_tasks(self):
        ds = make_synthetic_dataset(SyntheticConfig(n_classes=6, seed=0))
        stream = make_task_stream(ds, classes_per_task=2, seed=0)
        assert len(stream) == 3

    def test_disjoint_equal_classes_union(self, tiny_stream, tiny_dataset):
        seen = set()
        for task in tiny_stream.tasks:
            assert len(task.class_set) == 2
            assert not (set(task.class_set) & seen)
            seen |= set(task.class_set)
        assert seen == set(range(tiny_dataset.class_count))

    def test_labels_within_class_set(self, tiny_stream):
        for task in tiny_stream.tasks:
            for split in (task.train, task.val, task.test):
                assert set(np.unique(split.labels)) <= set(task.class_set)

    def test_determinism(self, tiny_dataset):
        a = make_task_stream(tiny_dataset, 2, seed=9)
        b = make_task_stream(tiny_dataset, 2, seed=9)
        assert a.class_order == b.class_order
        for ta, tb in zip(a.tasks, b.tasks):
            np.testing.assert_array_equal(ta.train.values, tb.train.values)
            np.testing.assert_array_equal(ta.val.labels, tb.val.labels)

    def test_seed_changes_order(self, tiny_dataset):
        orders = {tuple(make_task_stream(tiny_dataset, 2, seed=s).class_order) for s in range(8)}
        assert len(orders) > 1

    def test_remainder_classes_dropped(self):
        ds = make_synthetic_dataset(SyntheticConfig(n_classes=5, seed=0))
        stream = make_task_stream(ds, classes_per_task=2, seed=0)
        assert len(stream) == 2
        assert len(stream.all_classes) == 4

    def test_val_split_is_one_to_nine_and_stratified(self):
        ds = make_synthetic_dataset(SyntheticConfig(n_classes=4, train_per_class=100, seed=0))
        stream = make_task_stream(ds, 2, seed=0)
        for task in stream.tasks:
            for cls in task.class_set:
                n_val = int((task.val.labels == cls).sum())
                n_train = int((task.train.labels == cls).sum())
                assert n_val == 10 and n_train == 90

    def test_bad_classes_per_task(self, tiny_dataset):
        with pytest.raises(ConfigError):
            make_task_stream(tiny_dataset, 0, seed=0)
        with pytest.raises(ConfigError):
            make_task_stream(tiny_dataset, 99, seed=0)


class TestValidationSplit:
    def make_stream(self, n_classes):
        ds = make_synthetic_dataset(
            SyntheticConfig(n_classes=n_classes, train_per_class=20, test_per_class=5,
                            channels=2, length=32, seed=0)
        )
        return make_task_stream(ds, 2, seed=0)

    def test_grabmyo_like_split(self):
        stream = self.make_stream(16)  # 8 tasks
        val, exp = split_validation_stream(stream, 3)
        assert len(val) == 3 and len(exp) == 5
        assert not (val.all_classes & exp.all_classes)
        assert [t.index for t in exp.tasks] == [0, 1, 2, 3, 4]

    def test_wisdm_like_split(self):
        stream = self.make_stream(18)  # 9 tasks
        val, exp = split_validation_stream(stream, 3)
        assert len(val) == 3 and len(exp) == 6

    def test_short_stream_raises_protocol_error(self):
        stream = self.make_stream(6)  # 3 tasks, protocol A territory
        with pytest.raises(ProtocolError):
            split_validation_stream(stream, 3)


class TestCache:
    def test_roundtrip(self, tiny_dataset, tmp_path):
        recipe = preprocessing_hash({"v": 1})
        path = tmp_path / "cache.npz"
        save_dataset_cache(path, tiny_dataset, recipe)
        back = load_dataset_cache(path, expected_hash=recipe)
        np.testing.assert_array_equal(back.train.values, tiny_dataset.train.values)
        np.testing.assert_array_equal(back.test.subjects, tiny_dataset.test.subjects)
        assert back.class_count == tiny_dataset.class_count
        assert back.train.values.dtype == np.float32

    def test_hash_mismatch_rejected(self, tiny_dataset, tmp_path):
        path = tmp_path / "cache.npz"
        save_dataset_cache(path, tiny_dataset, "aaaa")
        with pytest.raises(ValidationError):
            load_dataset_cache(path, expected_hash="bbbb")


class TestLoaders:
    def test_missing_files_name_expected_layout(self, tmp_path):
        with pytest.raises(DatasetLoadError, match="Inertial Signals"):
            load_dataset("uci_har", tmp_path)
        with pytest.raises(DatasetLoadError, match="UWaveGestureLibrary"):
            load_dataset("uwave", tmp_path)
        with pytest.raises(DatasetLoadError, match="a01"):
            load_dataset("dsa", tmp_path)
        with pytest.raises(DatasetLoadError, match="session1"):
            load_dataset("grabmyo", tmp_path)
        with pytest.raises(DatasetLoadError, match="accel"):
            load_dataset("wisdm", tmp_path)

    def test_unknown_name(self):
        with pytest.raises(ConfigError):
            load_dataset("not_a_dataset", ".")

    def test_synthetic_via_dispatch(self):
        ds = load_dataset("synthetic", synthetic=SyntheticConfig(n_classes=6, n_subjects=4, seed=5))
        assert ds.class_count == 6
        again = load_dataset("synthetic", synthetic=SyntheticConfig(n_classes=6, n_subjects=4, seed=5))
        np.testing.assert_array_equal(ds.train.values, again.train.values)

    def test_grabmyo_layout_roundtrip(self, tmp_path):
        # write tiny raw recordings in the documented layout, then load
        rng = np.random.default_rng(0)
        base = tmp_path / "GRABMyo" / "session1"
        base.mkdir(parents=True)
        for subj in range(1, 3):
            for gesture in range(1, 17):
                for trial in range(1, 3):
                    sig = rng.standard_normal((28, 5 * 2048)).astype(np.float32)
                    np.save(base / f"subject{subj}_gesture{gesture}_trial{trial}.npy", sig)
        ds = load_dataset("grabmyo", tmp_path)
        assert ds.shape == (28, 128)
        assert ds.class_count == 16
        # 2 subjects x 16 gestures x 2 trials x 10 windows
        assert len(ds.train) + len(ds.test) == 2 * 16 * 2 * 10
