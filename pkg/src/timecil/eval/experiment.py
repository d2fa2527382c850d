"""Multi-seed experiment runs: stream building, tuning, persistence."""

from __future__ import annotations

import json
import logging
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..data.loaders import load_dataset
from ..data.streams import make_task_stream, split_validation_stream
from ..data.types import RawDataset, TaskStream
from ..errors import ConfigError, ProtocolError
from ..methods.assembly import method_assembly
from ..models.backbone import save_checkpoint
from ..training.logging import RunLogger
from ..training.trainer import run_offline, run_stream
from .config import ExperimentConfig
from .metrics import AccuracyMatrix, RunMetrics, mean_confidence_interval
from .tuning import expand_grid, tune_protocol_a, tune_protocol_b

log = logging.getLogger(__name__)


@dataclass
class SeedResult:
    seed: int
    status: str                      # "ok" | "failed"
    metrics: Optional[RunMetrics] = None
    hyperparams: dict = field(default_factory=dict)
    error: Optional[str] = None


@dataclass
class ExperimentReport:
    """Aggregate over seeds: mean and 95% t-interval per metric."""

    dataset: str
    method: str
    seeds: list
    results: list
    a_t: tuple = (float("nan"), None)
    f_t: Optional[tuple] = None
    a_cur: Optional[tuple] = None

    def to_dict(self) -> dict:
        def pack(pair):
            if pair is None:
                return None
            mean, half = pair
            return {"mean": mean, "ci95": half}

        return {
            "dataset": self.dataset,
            "method": self.method,
            "seeds": self.seeds,
            "A_T": pack(self.a_t),
            "F_T": pack(self.f_t),
            "A_cur": pack(self.a_cur),
            "runs": [
                {
                    "seed": r.seed,
                    "status": r.status,
                    "hyperparams": r.hyperparams,
                    "metrics": r.metrics.to_dict() if r.metrics else None,
                    "error": r.error,
                }
                for r in self.results
            ],
        }


def environment_manifest() -> dict:
    import scipy
    import torch

    return {
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "torch": torch.__version__,
    }


def resolve_protocol(cfg: ExperimentConfig, stream: TaskStream) -> str:
    if cfg.protocol == "a" or (cfg.protocol == "auto" and len(stream) <= 4):
        if len(stream) > 4:
            raise ProtocolError(
                f"protocol A requested for a {len(stream)}-task stream; use protocol B"
            )
        return "a"
    return "b"


def build_streams(cfg: ExperimentConfig, dataset: RawDataset,
                  seed: int) -> tuple[Optional[TaskStream], TaskStream, str]:
    """(tuning stream or None, experiment stream, protocol used)."""
    stream = make_task_stream(dataset, cfg.classes_per_task, seed)
    protocol = resolve_protocol(cfg, stream)
    if protocol == "a":
        return None, stream, "a"
    val_stream, exp_stream = split_validation_stream(stream, cfg.n_val_tasks)
    return val_stream, exp_stream, "b"


def run_single(cfg: ExperimentConfig, dataset: RawDataset, seed: int,
               out_dir: Optional[Path] = None) -> tuple[AccuracyMatrix, RunMetrics, dict]:
    """One seeded run: build streams, tune if a grid is given, train, persist."""
    val_stream, exp_stream, protocol = build_streams(cfg, dataset, seed)

    hyperparams = dict(cfg.hyperparams)
    if len(expand_grid(cfg.grid)) > 1:
        tuned = (
            tune_protocol_a(exp_stream, cfg)
            if protocol == "a"
            else tune_protocol_b(val_stream, cfg)
        )
        hyperparams.update(tuned)

    logger = RunLogger(out_dir / "train_log.jsonl" if out_dir else None)
    train_cfg = cfg.train_config(seed)
    if cfg.method == "offline":
        matrix = run_offline(exp_stream, train_cfg, cfg.backbone_config(),
                             cfg.classifier, logger)
        model = plugin = None
    else:
        plugin = method_assembly(
            cfg.method, exp_stream, seed, memory_pct=cfg.memory_pct,
            hyperparams=hyperparams, batch_size=cfg.batch_size,
            replay_batch_size=cfg.replay_batch_size,
        )
        matrix, model, plugin = run_stream(
            exp_stream, plugin, train_cfg, cfg.backbone_config(),
            cfg.classifier, logger, return_state=True,
        )
    metrics = RunMetrics.from_matrix(matrix)

    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        matrix.to_csv(out_dir / "accuracy_matrix.csv")
        (out_dir / "metrics.json").write_text(json.dumps(metrics.to_dict(), indent=2))
        cfg.save_yaml(out_dir / "config.yaml")
        if cfg.save_checkpoint and model is not None:
            save_checkpoint(model, out_dir / "checkpoint.npz")
        if cfg.method == "gr" and plugin is not None and plugin.frozen is not None:
            from .report import gr_sample_sheet

            gr_sample_sheet(plugin.frozen, exp_stream, out_dir / "gr_sample_sheet.png")
    return matrix, metrics, hyperparams


def _seed_job(cfg_dict: dict, seed: int, out_root: Optional[str]) -> SeedResult:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    dataset = load_dataset(cfg.dataset, cfg.data_root, cfg.synthetic_config())
    out_dir = Path(out_root) / str(seed) if out_root else None
    try:
        _, metrics, hyperparams = run_single(cfg, dataset, seed, out_dir)
        return SeedResult(seed=seed, status="ok", metrics=metrics, hyperparams=hyperparams)
    except Exception as exc:  # recorded, not fatal for the other seeds
        log.warning("seed %d failed: %s", seed, exc)
        return SeedResult(seed=seed, status="failed", error=str(exc))


def aggregate(cfg: ExperimentConfig, results: list) -> ExperimentReport:
    ok = [r for r in results if r.status == "ok"]
    report = ExperimentReport(
        dataset=cfg.dataset, method=cfg.method,
        seeds=cfg.seed_list, results=results,
    )
    if len(ok) < len(results):
        log.warning("%d of %d runs failed; aggregating the successes",
                    len(results) - len(ok), len(results))
    if ok:
        report.a_t = mean_confidence_interval([r.metrics.a_t for r in ok])
        f_vals = [r.metrics.f_t for r in ok if r.metrics.f_t is not None]
        c_vals = [r.metrics.a_cur for r in ok if r.metrics.a_cur is not None]
        report.f_t = mean_confidence_interval(f_vals) if f_vals else None
        report.a_cur = mean_confidence_interval(c_vals) if c_vals else None
    return report


def run_experiment(cfg: ExperimentConfig, persist: bool = True) -> ExperimentReport:
    """Run every seed (optionally across a worker pool) and aggregate."""
    out_root = None
    if persist:
        out_root = Path(cfg.out_dir) / cfg.dataset / cfg.method
        out_root.mkdir(parents=True, exist_ok=True)

    seeds = cfg.seed_list
    if not seeds:
        raise ConfigError("at least one seed is required")
    cfg_dict = cfg.to_dict()
    root_str = str(out_root) if out_root else None
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_seed_job, [cfg_dict] * len(seeds), seeds,
                                    [root_str] * len(seeds)))
    else:
        results = [_seed_job(cfg_dict, seed, root_str) for seed in seeds]

    report = aggregate(cfg, results)
    if out_root is not None:
        (out_root / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
        (out_root / "environment.json").write_text(json.dumps(environment_manifest(), indent=2))
    return report
