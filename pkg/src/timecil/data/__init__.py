from .types import RawDataset, SampleSet, Task, TaskStream, TimeSeriesSample
from .synthetic import SyntheticConfig, make_synthetic_dataset
from .preprocess import Recording, cut_windows, preprocess_grabmyo, preprocess_wisdm
from .streams import make_task_stream, split_validation_stream
from .loaders import DATASET_NAMES, load_dataset
from .cache import load_dataset_cache, preprocessing_hash, save_dataset_cache

__all__ = [
    "DATASET_NAMES",
    "RawDataset",
    "Recording",
    "SampleSet",
    "SyntheticConfig",
    "Task",
    "TaskStream",
    "TimeSeriesSample",
    "cut_windows",
    "load_dataset",
    "load_dataset_cache",
    "make_synthetic_dataset",
    "make_task_stream",
    "preprocess_grabmyo",
    "preprocess_wisdm",
    "preprocessing_hash",
    "save_dataset_cache",
    "split_validation_stream",
]
