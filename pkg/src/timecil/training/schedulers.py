"""Per-epoch learning-rate schedules (epochs are 1-based)."""

from __future__ import annotations

import math
from typing import Callable

from ..errors import ConfigError

SCHEDULERS = ("step10", "step15", "one_cycle")


def make_scheduler(kind: str, base_lr: float, total_epochs: int) -> Callable[[int], float]:
    """step10/step15 multiply the rate by 0.1 after epoch 10/15; one_cycle
    ramps up to base_lr at 30% of the budget and cosine-anneals down, with
    both endpoints below the base rate."""
    kind = str(kind).lower()
    if kind == "step10":
        return lambda epoch: base_lr * (0.1 if epoch > 10 else 1.0)
    if kind == "step15":
        return lambda epoch: base_lr * (0.1 if epoch > 15 else 1.0)
    if kind == "one_cycle":
        start_lr = base_lr / 25.0
        final_lr = base_lr / 1e4
        peak_epoch = max(2, round(0.3 * total_epochs))  # epoch 1 always starts low

        def one_cycle(epoch: int) -> float:
            if total_epochs <= 1:
                return start_lr
            if epoch <= peak_epoch:
                frac = (epoch - 1) / (peak_epoch - 1)
                return start_lr + frac * (base_lr - start_lr)
            frac = (epoch - peak_epoch) / max(1, total_epochs - peak_epoch)
            return final_lr + 0.5 * (base_lr - final_lr) * (1.0 + math.cos(math.pi * frac))

        return one_cycle
    raise ConfigError(f"unknown scheduler {kind!r}; expected one of {SCHEDULERS}")
