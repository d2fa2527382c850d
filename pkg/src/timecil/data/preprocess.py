"""Windowing and resampling of raw continuous recordings.

Two dataset families arrive as long per-subject signals rather than
pre-cut samples: surface-EMG gesture recordings (28 channels at 2048 Hz)
and phone-accelerometer activity streams (3 channels at 20 Hz). Both are
cut into non-overlapping windows and split 3:1 train/test so that every
subject appears in both partitions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import signal as sp_signal

from .types import SampleSet

log = logging.getLogger(__name__)

GRABMYO_RAW_RATE = 2048
GRABMYO_TARGET_RATE = 256
GRABMYO_WINDOW = 128  # 0.5 s at 256 Hz
WISDM_WINDOW = 200    # 10 s at 20 Hz


@dataclass
class Recording:
    """One continuous multichannel recording of a single class/subject."""

    subject: int
    label: int
    signal: np.ndarray  # (channels, T)


def cut_windows(x: np.ndarray, window: int) -> np.ndarray:
    """Non-overlapping windows: (C, T) -> (floor(T/window), C, window)."""
    n = x.shape[1] // window
    if n == 0:
        return np.zeros((0, x.shape[0], window), dtype=np.float32)
    trimmed = x[:, : n * window]
    return trimmed.reshape(x.shape[0], n, window).transpose(1, 0, 2).astype(np.float32)


def _window_recordings(
    recordings: Iterable[Recording],
    window: int,
    decimate_factor: Optional[int] = None,
) -> tuple[SampleSet, SampleSet, int]:
    """Window every recording and split 3:1 with all subjects in both parts.

    Within each recording, every 4th window goes to the test partition, so
    per (subject, class) the ratio is 3:1 up to one window. Recordings
    shorter than one window are skipped and counted.
    """
    train_parts, test_parts = [], []
    skipped = 0
    for rec in recordings:
        x = np.asarray(rec.signal, dtype=np.float64)
        if decimate_factor and decimate_factor > 1:
            if x.shape[1] > 3 * 8 * decimate_factor:  # filtfilt needs padding room
                x = sp_signal.decimate(x, decimate_factor, axis=1, zero_phase=True)
            else:
                x = x[:, ::decimate_factor]
        windows = cut_windows(x, window)
        if len(windows) == 0:
            skipped += 1
            continue
        idx = np.arange(len(windows))
        test_mask = idx % 4 == 3
        for mask, parts in ((~test_mask, train_parts), (test_mask, test_parts)):
            if mask.any():
                parts.append(
                    SampleSet(
                        windows[mask],
                        np.full(mask.sum(), rec.label, dtype=np.int64),
                        np.full(mask.sum(), rec.subject, dtype=np.int64),
                    )
                )
    if skipped:
        log.warning("%d recordings shorter than one window were skipped", skipped)
    channels = window  # placeholder for the empty case below
    if not train_parts and not test_parts:
        empty = SampleSet.empty(0, channels)
        return empty, empty, skipped
    ref = (train_parts or test_parts)[0]
    c, l = ref.shape
    train = SampleSet.concat(train_parts) if train_parts else SampleSet.empty(c, l)
    test = SampleSet.concat(test_parts) if test_parts else SampleSet.empty(c, l)
    return train, test, skipped


def preprocess_grabmyo(recordings: Iterable[Recording]) -> tuple[SampleSet, SampleSet, int]:
    """2048 Hz EMG recordings -> 256 Hz, 0.5 s windows of 128 steps, 3:1 split."""
    return _window_recordings(
        recordings,
        window=GRABMYO_WINDOW,
        decimate_factor=GRABMYO_RAW_RATE // GRABMYO_TARGET_RATE,
    )


def preprocess_wisdm(recordings: Iterable[Recording]) -> tuple[SampleSet, SampleSet, int]:
    """20 Hz accelerometer streams -> 10 s windows of 200 steps, 3:1 split."""
    return _window_recordings(recordings, window=WISDM_WINDOW)
