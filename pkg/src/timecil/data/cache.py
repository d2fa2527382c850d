"""On-disk cache of preprocessed samples.

One file per (dataset, preprocessing recipe): an .npz archive holding the
float32 sample arrays plus a JSON header {dataset, C, L, n,
preprocessing_hash}. Writes go through a temp file and an atomic rename so
parallel workers never observe a half-written cache.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ValidationError
from .types import RawDataset, SampleSet


def preprocessing_hash(recipe: dict) -> str:
    return hashlib.sha256(json.dumps(recipe, sort_keys=True).encode()).hexdigest()[:16]


def cache_path(cache_dir: str, dataset: str, recipe_hash: str) -> Path:
    return Path(cache_dir) / f"{dataset}-{recipe_hash}.npz"


def save_dataset_cache(path, dataset: RawDataset, recipe_hash: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "dataset": dataset.name,
        "C": dataset.shape[0],
        "L": dataset.shape[1],
        "n": len(dataset.train) + len(dataset.test),
        "preprocessing_hash": recipe_hash,
    }
    arrays = {
        "header": np.frombuffer(json.dumps(header).encode(), dtype=np.uint8),
        "class_count": np.int64(dataset.class_count),
        "train_values": dataset.train.values.astype(np.float32),
        "train_labels": dataset.train.labels,
        "test_values": dataset.test.values.astype(np.float32),
        "test_labels": dataset.test.labels,
    }
    if dataset.train.subjects is not None:
        arrays["train_subjects"] = dataset.train.subjects
        arrays["test_subjects"] = dataset.test.subjects
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".npz.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, **arrays)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_dataset_cache(path, expected_hash: Optional[str] = None) -> RawDataset:
    with np.load(path) as z:
        header = json.loads(bytes(z["header"]).decode())
        if expected_hash is not None and header["preprocessing_hash"] != expected_hash:
            raise ValidationError(
                f"cache {path} was built with preprocessing {header['preprocessing_hash']}, "
                f"expected {expected_hash}"
            )
        train_subj = z["train_subjects"] if "train_subjects" in z else None
        test_subj = z["test_subjects"] if "test_subjects" in z else None
        return RawDataset(
            name=header["dataset"],
            train=SampleSet(z["train_values"], z["train_labels"], train_subj),
            test=SampleSet(z["test_values"], z["test_labels"], test_subj),
            class_count=int(z["class_count"]),
        )
