"""Early stopping on validation loss with best-snapshot restore."""

from __future__ import annotations

import math
from typing import Optional

from ..errors import ConfigError
from ..models.backbone import restore_state, snapshot_state


class EarlyStopper:
    """Stops after ``patience`` epochs without a strict improvement and
    restores the parameters of the best epoch seen."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ConfigError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.best_val_loss = math.inf
        self.best_epoch: Optional[int] = None
        self.epochs_since_best = 0
        self._best_state: Optional[dict] = None

    def update(self, val_loss: float, model, epoch: int) -> bool:
        """Record this epoch; True means training should stop."""
        if val_loss < self.best_val_loss:
            self.best_val_loss = val_loss
            self.best_epoch = epoch
            self.epochs_since_best = 0
            self._best_state = snapshot_state(model)
            return False
        self.epochs_since_best += 1
        return self.epochs_since_best >= self.patience

    def restore_best(self, model) -> None:
        if self._best_state is not None:
            restore_state(model, self._best_state)
