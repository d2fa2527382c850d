"""Hyperparameter tuning under the two CIL protocols.

Protocol A (short streams): every grid point is scored by one full run over
the stream, using the mean of the per-task validation accuracies under the
final model. Protocol B (long streams): grid points are scored on the
held-out validation stream by the mean final average accuracy over a small
number of seeded runs. Ties break toward the earlier grid point.
"""

from __future__ import annotations

import itertools
from typing import Optional

from ..data.types import TaskStream
from ..errors import ConfigError, ProtocolError
from ..methods.assembly import method_assembly
from ..seeding import substream_int
from ..training.trainer import evaluate_accuracy, run_stream
from .metrics import avg_accuracy


def expand_grid(grid: dict) -> list:
    """Cartesian product in declared key order; single empty dict for no grid."""
    if not grid:
        return [{}]
    keys = list(grid)
    combos = []
    for values in itertools.product(*(grid[k] for k in keys)):
        combos.append(dict(zip(keys, values)))
    return combos


def _scored_run(stream: TaskStream, cfg, seed: int, hyperparams: dict):
    plugin = method_assembly(
        cfg.method, stream, seed, memory_pct=cfg.memory_pct,
        hyperparams={**cfg.hyperparams, **hyperparams},
        batch_size=cfg.batch_size, replay_batch_size=cfg.replay_batch_size,
    )
    return run_stream(
        stream, plugin, cfg.train_config(seed),
        backbone=cfg.backbone_config(), head_kind=cfg.classifier,
        return_state=True,
    )


def tune_protocol_a(stream: TaskStream, cfg, grid: Optional[dict] = None) -> dict:
    """Grid search on a short stream (at most 4 tasks)."""
    if len(stream) > 4:
        raise ProtocolError(
            f"protocol A expects a stream of at most 4 tasks, got {len(stream)}; use protocol B"
        )
    points = expand_grid(cfg.grid if grid is None else grid)
    if not points:
        raise ConfigError("hyperparameter grid expanded to zero points")
    best_point, best_score = None, -1.0
    for point in points:
        _, model, _ = _scored_run(stream, cfg, cfg.seed_list[0], point)
        score = sum(evaluate_accuracy(model, t.val) for t in stream.tasks) / len(stream)
        if score > best_score:
            best_point, best_score = point, score
    return best_point


def tune_protocol_b(val_stream: TaskStream, cfg, grid: Optional[dict] = None,
                    n_val_runs: Optional[int] = None) -> dict:
    """Grid search on the reserved validation stream (disjoint classes)."""
    points = expand_grid(cfg.grid if grid is None else grid)
    if not points:
        raise ConfigError("hyperparameter grid expanded to zero points")
    runs = cfg.n_val_runs if n_val_runs is None else n_val_runs
    best_point, best_score = None, -1.0
    for point in points:
        scores = []
        for r in range(runs):
            run_seed = substream_int(cfg.seed_list[0], "val_run", r) % (2**31)
            matrix, _, _ = _scored_run(val_stream, cfg, run_seed, point)
            scores.append(avg_accuracy(matrix, matrix.n_tasks))
        score = sum(scores) / len(scores)
        if score > best_score:
            best_point, best_score = point, score
    return best_point
