"""One-axis ablation sweeps with a combined report and comparison plot."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from ..errors import ConfigError
from .config import ExperimentConfig
from .experiment import run_experiment

ABLATION_AXES = {
    "memory_budget": ("memory_pct", [0.01, 0.05, 0.10, 0.20, 1.00]),
    "classifier": ("classifier", ["softmax_ce", "sigmoid_bce", "split_cosine", "ncm"]),
    "normalization": ("internal_norm", ["batch", "layer"]),
}


def ablation_sweep(kind: str, base_cfg: ExperimentConfig, persist: bool = True) -> dict:
    """Sweep one axis with everything else fixed; returns the combined report."""
    if kind not in ABLATION_AXES:
        raise ConfigError(f"unknown ablation {kind!r}; expected one of {sorted(ABLATION_AXES)}")
    field_name, values = ABLATION_AXES[kind]

    points = []
    for value in values:
        cfg = dataclasses.replace(base_cfg, **{field_name: value})
        cfg = ExperimentConfig.from_dict(cfg.to_dict())  # revalidate the combination
        cfg.out_dir = str(Path(base_cfg.out_dir) / f"ablate_{kind}" / str(value))
        report = run_experiment(cfg, persist=persist)
        points.append({"value": value, "report": report.to_dict()})

    combined = {
        "ablation": kind,
        "swept_field": field_name,
        "dataset": base_cfg.dataset,
        "method": base_cfg.method,
        "points": points,
    }
    if persist:
        out = Path(base_cfg.out_dir) / f"ablate_{kind}"
        out.mkdir(parents=True, exist_ok=True)
        (out / "combined_report.json").write_text(json.dumps(combined, indent=2))
        from .report import plot_sweep

        plot_sweep(combined, out / "sweep.png")
    return combined
