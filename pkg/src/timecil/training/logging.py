"""Per-run JSON-lines logging plus in-memory traces for audits."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional


class RunLogger:
    """Collects epoch records (and the raw per-step loss trace) for one run.

    When a path is given every record is appended as one JSON line.
    """

    def __init__(self, path: Optional[str] = None):
        self.path = Path(path) if path else None
        self.records: list[dict] = []
        self.step_losses: list[float] = []
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("")

    def log(self, **record) -> None:
        self.records.append(record)
        if self.path:
            with open(self.path, "a") as fh:
                fh.write(json.dumps(record) + "\n")

    def log_step(self, loss: float) -> None:
        self.step_losses.append(loss)

    def epoch_records(self) -> list[dict]:
        return [r for r in self.records if "epoch" in r]
