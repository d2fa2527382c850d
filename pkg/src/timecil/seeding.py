"""Named substreams of randomness derived from a single experiment seed.

Every stochastic component (class order, parameter init, batch order,
buffer sampling, generator sampling, ...) pulls from its own substream so
that adding or removing one consumer never perturbs the others. Substreams
are keyed by arbitrary name tuples and are stable across processes.
"""

from __future__ import annotations

import hashlib

import numpy as np
import torch

_MASK63 = (1 << 63) - 1


def _name_entropy(names: tuple) -> int:
    digest = hashlib.sha256("/".join(str(n) for n in names).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def substream(seed: int, *names) -> np.random.Generator:
    """Return a numpy Generator for the substream (seed, *names)."""
    ss = np.random.SeedSequence([int(seed) & _MASK63, _name_entropy(names)])
    return np.random.default_rng(ss)


def substream_int(seed: int, *names) -> int:
    """63-bit integer seed for libraries that want a plain int (torch)."""
    ss = np.random.SeedSequence([int(seed) & _MASK63, _name_entropy(names)])
    return int(ss.generate_state(1, dtype=np.uint64)[0]) & _MASK63


def torch_generator(seed: int, *names) -> torch.Generator:
    """CPU torch.Generator seeded from the named substream."""
    g = torch.Generator()
    g.manual_seed(substream_int(seed, *names))
    return g


def seed_torch_global(seed: int, *names) -> None:
    """Seed torch's global RNG (dropout etc.) from a named substream."""
    torch.manual_seed(substream_int(seed, *names))
