"""Class-incremental learning harness for multichannel time series."""

__version__ = "0.1.0"

from . import data, errors, eval, memory, methods, models, training
from .seeding import seed_torch_global, substream, substream_int, torch_generator

__all__ = [
    "data",
    "errors",
    "eval",
    "memory",
    "methods",
    "models",
    "seed_torch_global",
    "substream",
    "substream_int",
    "torch_generator",
    "training",
]
