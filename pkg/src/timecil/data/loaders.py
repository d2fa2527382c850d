"""Dataset loaders.

Real datasets are read from a local root directory (nothing is downloaded);
each loader documents the layout it expects and raises DatasetLoadError
naming it when files are missing. Loaded shapes are validated against the
published per-dataset (C, L):

    uci_har   9 x 128    uwave  3 x 315    dsa  45 x 125
    grabmyo  28 x 128    wisdm  3 x 200

The synthetic dataset needs no files and is controlled by SyntheticConfig.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigError, DatasetLoadError, ValidationError
from .preprocess import Recording, preprocess_grabmyo, preprocess_wisdm
from .synthetic import SyntheticConfig, make_synthetic_dataset
from .types import RawDataset, SampleSet

EXPECTED_SHAPES = {
    "uci_har": (9, 128),
    "uwave": (3, 315),
    "dsa": (45, 125),
    "grabmyo": (28, 128),
    "wisdm": (3, 200),
}

DATASET_NAMES = list(EXPECTED_SHAPES) + ["synthetic"]

_UCI_HAR_SIGNALS = [
    "body_acc_x", "body_acc_y", "body_acc_z",
    "body_gyro_x", "body_gyro_y", "body_gyro_z",
    "total_acc_x", "total_acc_y", "total_acc_z",
]


def _require(path: Path, layout: str) -> Path:
    if not path.exists():
        raise DatasetLoadError(f"missing {path}; expected layout:\n{layout}")
    return path


def _check_shape(ds: RawDataset, name: str) -> RawDataset:
    expected = EXPECTED_SHAPES[name]
    if ds.shape != expected:
        raise ValidationError(f"{name}: loaded shape {ds.shape}, expected {expected}")
    ds.validate()
    return ds


def load_uci_har(root) -> RawDataset:
    """Smartphone activity dataset: 9-channel inertial windows of 128 steps.

    Expected layout (the published archive, unpacked under root):
        <root>/UCI HAR Dataset/train/Inertial Signals/<signal>_train.txt
        <root>/UCI HAR Dataset/train/y_train.txt
        <root>/UCI HAR Dataset/train/subject_train.txt
        ... and the same under test/.
    """
    layout = load_uci_har.__doc__
    base = Path(root)
    if (base / "UCI HAR Dataset").exists():
        base = base / "UCI HAR Dataset"

    def read_split(split: str) -> SampleSet:
        sig_dir = _require(base / split / "Inertial Signals", layout)
        channels = [
            np.loadtxt(_require(sig_dir / f"{sig}_{split}.txt", layout))
            for sig in _UCI_HAR_SIGNALS
        ]
        values = np.stack(channels, axis=1)  # (n, 9, 128)
        labels = np.loadtxt(_require(base / split / f"y_{split}.txt", layout), dtype=np.int64) - 1
        subjects = np.loadtxt(_require(base / split / f"subject_{split}.txt", layout), dtype=np.int64)
        return SampleSet(values, labels, subjects)

    ds = RawDataset("uci_har", read_split("train"), read_split("test"), class_count=6)
    return _check_shape(ds, "uci_har")


def load_uwave(root) -> RawDataset:
    """Accelerometer gesture dataset, 3 axes of 315 steps, published split.

    Expected layout (UCR-style text, one sample per row, label first):
        <root>/UWave/UWaveGestureLibrary_<X|Y|Z>_<TRAIN|TEST>.txt
    """
    layout = load_uwave.__doc__
    base = Path(root) / "UWave"

    def read_split(split: str) -> SampleSet:
        axes, labels = [], None
        for axis in "XYZ":
            path = _require(base / f"UWaveGestureLibrary_{axis}_{split}.txt", layout)
            raw = np.loadtxt(path)
            labels = raw[:, 0].astype(np.int64) - 1
            axes.append(raw[:, 1:])
        return SampleSet(np.stack(axes, axis=1), labels, None)

    ds = RawDataset("uwave", read_split("TRAIN"), read_split("TEST"), class_count=8)
    return _check_shape(ds, "uwave")


def load_dsa(root) -> RawDataset:
    """Daily/sports activity segments: 45 channels x 125 steps.

    Expected layout (the published archive):
        <root>/DSA/a01 ... a19/p1 ... p8/s01.txt ... s60.txt
    each file one 125x45 comma-separated segment. The 19th activity is
    dropped so classes split evenly; per (activity, subject) the first 45
    segments are train and the last 15 test (3:1, all subjects in both).
    """
    layout = load_dsa.__doc__
    base = _require(Path(root) / "DSA", layout)
    train_parts, test_parts = [], []
    for label in range(18):
        act_dir = _require(base / f"a{label + 1:02d}", layout)
        for subj in range(8):
            subj_dir = _require(act_dir / f"p{subj + 1}", layout)
            segs = sorted(subj_dir.glob("s*.txt"))
            if not segs:
                raise DatasetLoadError(f"no segment files in {subj_dir}; expected layout:\n{layout}")
            arrays = [np.loadtxt(s, delimiter=",").T for s in segs]  # (45, 125) each
            values = np.stack(arrays)
            n_train = (len(values) * 3) // 4
            for sl, parts in ((slice(None, n_train), train_parts), (slice(n_train, None), test_parts)):
                part = values[sl]
                parts.append(
                    SampleSet(
                        part,
                        np.full(len(part), label, dtype=np.int64),
                        np.full(len(part), subj, dtype=np.int64),
                    )
                )
    ds = RawDataset("dsa", SampleSet.concat(train_parts), SampleSet.concat(test_parts), class_count=18)
    return _check_shape(ds, "dsa")


def load_grabmyo(root) -> RawDataset:
    """Forearm EMG gestures, session 1, windowed to 28 x 128 at 256 Hz.

    Expected layout (raw 2048 Hz recordings exported per trial):
        <root>/GRABMyo/session1/subject<S>_gesture<G>_trial<T>.npy
    each file a (28, T) float array. Gesture ids 1..16 map to classes 0..15.
    """
    layout = load_grabmyo.__doc__
    base = _require(Path(root) / "GRABMyo" / "session1", layout)
    pattern = re.compile(r"subject(\d+)_gesture(\d+)_trial(\d+)\.npy$")
    recordings = []
    for path in sorted(base.glob("*.npy")):
        m = pattern.search(path.name)
        if not m:
            continue
        recordings.append(
            Recording(
                subject=int(m.group(1)),
                label=int(m.group(2)) - 1,
                signal=np.load(path),
            )
        )
    if not recordings:
        raise DatasetLoadError(f"no recordings under {base}; expected layout:\n{layout}")
    train, test, _ = preprocess_grabmyo(recordings)
    ds = RawDataset("grabmyo", train, test, class_count=16)
    return _check_shape(ds, "grabmyo")


def load_wisdm(root) -> RawDataset:
    """Phone-accelerometer activity streams windowed to 3 x 200 at 20 Hz.

    Expected layout (the published raw archive):
        <root>/WISDM/raw/phone/accel/data_<subject>_accel_phone.txt
    lines "subject,activity_code,timestamp,x,y,z;". The 18 activity codes
    found are sorted and mapped to classes 0..17.
    """
    layout = load_wisdm.__doc__
    base = _require(Path(root) / "WISDM" / "raw" / "phone" / "accel", layout)
    files = sorted(base.glob("data_*_accel_phone.txt"))
    if not files:
        raise DatasetLoadError(f"no accel files under {base}; expected layout:\n{layout}")

    runs: dict[tuple[int, str], list] = {}
    codes: set[str] = set()
    for path in files:
        for line in path.read_text().splitlines():
            line = line.strip().rstrip(";")
            if not line:
                continue
            subj, code, _ts, x, y, z = line.split(",")[:6]
            codes.add(code)
            runs.setdefault((int(subj), code), []).append((float(x), float(y), float(z)))
    code_to_class = {c: i for i, c in enumerate(sorted(codes))}
    if len(code_to_class) != 18:
        raise ValidationError(f"wisdm: found {len(code_to_class)} activity codes, expected 18")
    recordings = [
        Recording(subject=subj, label=code_to_class[code], signal=np.asarray(rows, dtype=np.float64).T)
        for (subj, code), rows in sorted(runs.items())
    ]
    train, test, _ = preprocess_wisdm(recordings)
    ds = RawDataset("wisdm", train, test, class_count=18)
    return _check_shape(ds, "wisdm")


_LOADERS = {
    "uci_har": load_uci_har,
    "uwave": load_uwave,
    "dsa": load_dsa,
    "grabmyo": load_grabmyo,
    "wisdm": load_wisdm,
}


def load_dataset(name: str, root: Optional[str] = None,
                 synthetic: Optional[SyntheticConfig] = None) -> RawDataset:
    """Load a named dataset from root, or build the synthetic one."""
    key = name.lower().replace("-", "_")
    if key == "synthetic":
        return make_synthetic_dataset(synthetic or SyntheticConfig())
    if key not in _LOADERS:
        raise ConfigError(f"unknown dataset {name!r}; expected one of {DATASET_NAMES}")
    if root is None:
        raise ConfigError(f"dataset {name!r} requires a data root directory")
    return _LOADERS[key](root)
