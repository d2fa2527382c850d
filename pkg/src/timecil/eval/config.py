"""Declarative experiment configuration, loadable from YAML.

The config file mirrors ExperimentConfig field for field; unknown keys are
rejected so typos fail fast instead of silently using defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from ..data.loaders import DATASET_NAMES
from ..data.synthetic import SyntheticConfig
from ..errors import ConfigError
from ..methods.assembly import METHODS, REPLAY_KINDS
from ..models.backbone import BackboneConfig
from ..models.heads import HEAD_KINDS
from ..training.schedulers import SCHEDULERS
from ..training.trainer import TrainConfig

PROTOCOLS = ("a", "b", "auto")


@dataclass
class ExperimentConfig:
    dataset: str = "synthetic"
    data_root: Optional[str] = None
    method: str = "naive"
    seeds: object = 5                  # int n -> 0..n-1, or explicit list
    classes_per_task: int = 2
    input_norm: str = "none"
    internal_norm: str = "batch"
    classifier: str = "softmax_ce"
    memory_pct: float = 0.05
    protocol: str = "auto"
    epochs_per_task: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 64
    replay_batch_size: int = 32
    scheduler: str = "step15"
    early_stop_patience: Optional[int] = None
    out_dir: str = "results"
    grid: dict = field(default_factory=dict)
    hyperparams: dict = field(default_factory=dict)
    backbone: dict = field(default_factory=dict)
    synthetic: dict = field(default_factory=dict)
    n_val_tasks: int = 3
    n_val_runs: int = 2
    save_checkpoint: bool = False
    workers: int = 1

    def __post_init__(self):
        self.dataset = str(self.dataset).lower().replace("-", "_")
        self.method = str(self.method).lower()
        self.protocol = str(self.protocol).lower()
        if self.dataset not in [n.lower() for n in DATASET_NAMES]:
            raise ConfigError(f"unknown dataset {self.dataset!r}; expected one of {DATASET_NAMES}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {sorted(METHODS)}")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.classifier not in HEAD_KINDS:
            raise ConfigError(f"classifier must be one of {HEAD_KINDS}, got {self.classifier!r}")
        if str(self.scheduler).lower() not in SCHEDULERS:
            raise ConfigError(f"scheduler must be one of {SCHEDULERS}, got {self.scheduler!r}")
        if not 0.0 < self.memory_pct <= 1.0:
            raise ConfigError(f"memory_pct must lie in (0, 1], got {self.memory_pct}")
        if self.batch_size < 2:
            raise ConfigError("batch_size must be >= 2")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ConfigError("early_stop_patience must be >= 1 when set")
        if self.classifier == "ncm" and self.method not in REPLAY_KINDS:
            raise ConfigError(
                "the NCM classifier needs memory samples for its prototypes; "
                f"method {self.method!r} keeps none"
            )
        if isinstance(self.seeds, bool) or (
            not isinstance(self.seeds, int) and not isinstance(self.seeds, (list, tuple))
        ):
            raise ConfigError("seeds must be an integer count or a list of integers")

    @property
    def seed_list(self) -> list:
        if isinstance(self.seeds, int):
            return list(range(self.seeds))
        return [int(s) for s in self.seeds]

    def backbone_config(self) -> BackboneConfig:
        known = {f.name for f in dataclasses.fields(BackboneConfig)}
        unknown = set(self.backbone) - known
        if unknown:
            raise ConfigError(f"unknown backbone keys {sorted(unknown)}; expected subset of {sorted(known)}")
        merged = dict(self.backbone)
        merged["internal_norm"] = self.internal_norm
        merged["input_norm"] = self.input_norm
        return BackboneConfig(**merged)

    def synthetic_config(self, seed: int = 0) -> SyntheticConfig:
        known = {f.name for f in dataclasses.fields(SyntheticConfig)}
        unknown = set(self.synthetic) - known
        if unknown:
            raise ConfigError(f"unknown synthetic keys {sorted(unknown)}; expected subset of {sorted(known)}")
        return SyntheticConfig(**self.synthetic)

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            epochs_per_task=self.epochs_per_task,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            replay_batch_size=self.replay_batch_size,
            scheduler=self.scheduler,
            early_stop_patience=self.early_stop_patience,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}; expected subset of {sorted(known)}")
        return cls(**data)

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        raw = yaml.safe_load(Path(path).read_text())
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a mapping at the top level")
        return cls.from_dict(raw)

    def save_yaml(self, path) -> None:
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=False))
