"""Fixed-budget replay buffer with pluggable update and retrieval policies."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ..data.types import SampleSet, TaskStream, TimeSeriesSample
from ..errors import ConfigError

log = logging.getLogger(__name__)


def budget_from_fraction(stream: TaskStream, pct: float) -> int:
    """Memory budget M = floor(pct * experiment-stream training size).

    pct must lie in (0, 1]; the result is at least 1 so a non-zero fraction
    always buys at least one slot.
    """
    if not 0.0 < pct <= 1.0:
        raise ConfigError(f"memory fraction must lie in (0, 1], got {pct}")
    return max(1, int(np.floor(pct * stream.train_size)))


@dataclass
class BufferEntry:
    sample: TimeSeriesSample
    stored_logits: Optional[np.ndarray] = None
    score: Optional[float] = None
    insertion_index: int = 0


@dataclass
class MemoryBuffer:
    """At most ``capacity`` entries; ``seen_count`` counts items streamed past."""

    capacity: int
    entries: list = field(default_factory=list)
    seen_count: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def classes(self) -> list:
        return sorted({e.sample.label for e in self.entries})

    @property
    def subjects(self) -> Optional[list]:
        if any(e.sample.subject is None for e in self.entries):
            return None
        return sorted({e.sample.subject for e in self.entries})

    def entries_by_class(self) -> dict:
        groups: dict[int, list] = {}
        for e in self.entries:
            groups.setdefault(e.sample.label, []).append(e)
        return groups

    def as_sample_set(self, entries: Optional[list] = None) -> SampleSet:
        entries = self.entries if entries is None else entries
        if not entries:
            raise ConfigError("cannot materialize an empty entry list")
        subj = None
        if all(e.sample.subject is not None for e in entries):
            subj = np.array([e.sample.subject for e in entries], dtype=np.int64)
        return SampleSet(
            np.stack([e.sample.values for e in entries]),
            np.array([e.sample.label for e in entries], dtype=np.int64),
            subj,
        )

    def export(self, path) -> None:
        """Binary snapshot + JSON manifest {M, seen_count, policy names}."""
        manifest = {
            "M": self.capacity,
            "seen_count": self.seen_count,
            "n_entries": len(self.entries),
            "classes": self.classes,
        }
        arrays = {"manifest": np.frombuffer(json.dumps(manifest).encode(), dtype=np.uint8)}
        if self.entries:
            arrays["values"] = np.stack([e.sample.values for e in self.entries])
            arrays["labels"] = np.array([e.sample.label for e in self.entries], dtype=np.int64)
            arrays["insertion_index"] = np.array([e.insertion_index for e in self.entries], dtype=np.int64)
            subjects = [-1 if e.sample.subject is None else e.sample.subject for e in self.entries]
            arrays["subjects"] = np.array(subjects, dtype=np.int64)
        np.savez(path, **arrays)


def reservoir_update(buffer: MemoryBuffer, batch: Iterable[TimeSeriesSample],
                     rng: np.random.Generator) -> MemoryBuffer:
    """Classic streaming reservoir: each item seen so far stays resident
    with probability capacity / seen_count."""
    samples = list(batch)
    if not samples:
        return buffer
    if buffer.capacity <= 0:
        buffer.seen_count += len(samples)
        return buffer
    # one vectorized draw per incoming item keeps long streams cheap
    u = rng.random(len(samples))
    for sample, ui in zip(samples, u):
        idx = buffer.seen_count
        if len(buffer.entries) < buffer.capacity:
            buffer.entries.append(BufferEntry(sample, insertion_index=idx))
        else:
            j = int(ui * (idx + 1))
            if j < buffer.capacity:
                buffer.entries[j] = BufferEntry(sample, insertion_index=idx)
        buffer.seen_count += 1
    return buffer


def subject_restricted_update(buffer: MemoryBuffer, batch: Iterable[TimeSeriesSample],
                              allowed_subjects, rng: np.random.Generator) -> MemoryBuffer:
    """Reservoir over the sub-stream of samples from the allowed subjects.

    Deliberately skews the buffer's subject distribution away from the
    on-task distribution; a batch with no allowed samples is a no-op.
    """
    allowed = set(int(s) for s in allowed_subjects)
    if not allowed:
        raise ConfigError("allowed_subjects must be a non-empty set")
    kept = [s for s in batch if s.subject is not None and int(s.subject) in allowed]
    return reservoir_update(buffer, kept, rng)


def random_retrieve(buffer: MemoryBuffer, k: int, rng: np.random.Generator) -> list:
    """k entries uniformly without replacement (with, if fewer than k stored)."""
    n = len(buffer.entries)
    if n == 0 or k <= 0:
        return []
    replace = n < k
    idx = rng.choice(n, size=k, replace=replace)
    return [buffer.entries[i] for i in idx]


class SubjectBalancedRetriever:
    """Round-robin per-subject quotas, uniform within each subject.

    The +1 remainder quota rotates across calls so long-run per-subject
    retrieval frequencies equalize.
    """

    def __init__(self):
        self._rotation = 0

    def __call__(self, buffer: MemoryBuffer, k: int, rng: np.random.Generator) -> list:
        n = len(buffer.entries)
        if n == 0 or k <= 0:
            return []
        if buffer.subjects is None:
            log.warning("buffer entries lack subject ids; falling back to random retrieval")
            return random_retrieve(buffer, k, rng)
        pools: dict[int, list] = {}
        for e in buffer.entries:
            pools.setdefault(int(e.sample.subject), []).append(e)
        subjects = sorted(pools)
        s = len(subjects)
        base, rem = divmod(k, s)
        quotas = {subj: base for subj in subjects}
        for i in range(rem):
            quotas[subjects[(self._rotation + i) % s]] += 1
        self._rotation = (self._rotation + rem) % s if rem else self._rotation

        picked: list = []
        deficit = 0
        for subj in subjects:
            pool = pools[subj]
            want = quotas[subj]
            take = min(want, len(pool))
            deficit += want - take
            if take:
                idx = rng.choice(len(pool), size=take, replace=False)
                picked.extend(pool[i] for i in idx)
        if deficit:  # spill unmet quotas across all entries
            idx = rng.choice(n, size=deficit, replace=deficit > n)
            picked.extend(buffer.entries[i] for i in idx)
        return picked


def subject_balanced_retrieve(buffer: MemoryBuffer, k: int, rng: np.random.Generator) -> list:
    return SubjectBalancedRetriever()(buffer, k, rng)
