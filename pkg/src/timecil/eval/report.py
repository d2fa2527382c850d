"""Report rendering: tables from persisted runs, curve and sweep plots,
and real-versus-generated sample sheets."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import torch

from ..data.types import TaskStream
from ..models.vae import generate


def _fmt(pair: dict | None) -> str:
    if pair is None or pair.get("mean") is None:
        return "n/a"
    mean = pair["mean"]
    if pair.get("ci95") is None:
        return f"{100 * mean:.1f}"
    return f"{100 * mean:.1f} ± {100 * pair['ci95']:.1f}"


def collect_reports(out_dir) -> list:
    """All report.json files under the results tree, sorted by path."""
    reports = []
    for path in sorted(Path(out_dir).rglob("report.json")):
        with open(path) as fh:
            reports.append(json.load(fh))
    return reports


def render_table(reports: list, fmt: str = "md") -> str:
    """Markdown or CSV summary: one row per (dataset, method)."""
    rows = [
        (r["dataset"], r["method"], _fmt(r["A_T"]), _fmt(r["F_T"]), _fmt(r["A_cur"]))
        for r in reports
    ]
    header = ("dataset", "method", "A_T", "F_T", "A_cur")
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)] if rows else [len(h) for h in header]
    def fmt_row(row):
        return "| " + " | ".join(str(x).ljust(w) for x, w in zip(row, widths)) + " |"
    lines = [fmt_row(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    lines += [fmt_row(row) for row in rows]
    return "\n".join(lines) + "\n"


def plot_accuracy_evolution(reports: list, path) -> None:
    """Average-accuracy curves across tasks, one line per method; joint
    baselines appear as a single final point."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for report in reports:
        curves = [
            run["metrics"]["A_curve"]
            for run in report["runs"]
            if run["status"] == "ok" and run["metrics"]
        ]
        label = report["method"]
        full = [c for c in curves if c]
        if full:
            arr = np.array([c for c in full if len(c) == len(full[0])])
            steps = np.arange(1, arr.shape[1] + 1)
            ax.plot(steps, arr.mean(axis=0), marker="o", label=label)
        else:  # joint training: a single point at the final step
            ok_runs = [run["metrics"] for run in report["runs"]
                       if run["status"] == "ok" and run["metrics"]]
            if ok_runs:
                t = max(m.get("T", 1) for m in ok_runs)
                ax.plot([t], [np.mean([m["A_T"] for m in ok_runs])], marker="*",
                        markersize=12, linestyle="none", label=label)
    ax.set_xlabel("tasks learned")
    ax.set_ylabel("average accuracy")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(combined: dict, path) -> None:
    """Final average accuracy against the swept value, with 95% bars."""
    values = [str(p["value"]) for p in combined["points"]]
    means, halves = [], []
    for p in combined["points"]:
        a_t = p["report"]["A_T"]
        means.append(np.nan if a_t is None else a_t["mean"])
        halves.append(0.0 if a_t is None or a_t.get("ci95") is None else a_t["ci95"])
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    x = np.arange(len(values))
    ax.errorbar(x, means, yerr=halves, marker="o", capsize=4)
    ax.set_xticks(x, values)
    ax.set_xlabel(combined["swept_field"])
    ax.set_ylabel("final average accuracy")
    ax.set_title(f"{combined['method']} on {combined['dataset']}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def gr_sample_sheet(frozen, stream: TaskStream, path, per_class: int = 3,
                    pool: int = 256) -> None:
    """Grid of real vs generated series per class for visual audits.

    Generated samples are unlabeled; the frozen learner assigns them the
    classes it knows, so sparsely generated classes may show empty cells.
    """
    from ..methods.generative import pseudo_label

    pseudo = generate(frozen.generator, pool, stream.seed, "sample_sheet")
    labels = pseudo_label(frozen.learner, pseudo)
    classes = sorted(frozen.learner.known_classes)

    fig, axes = plt.subplots(len(classes), 2 * per_class,
                             figsize=(2.2 * 2 * per_class, 1.6 * len(classes)),
                             squeeze=False)
    for row, cls in enumerate(classes):
        real = []
        for task in stream.tasks:
            idx = np.flatnonzero(task.train.labels == cls)[:per_class]
            real.extend(task.train.values[i] for i in idx)
        gen_idx = np.flatnonzero(labels == cls)[:per_class]
        for col in range(per_class):
            ax = axes[row][col]
            if col < len(real):
                ax.plot(real[col].T, linewidth=0.6)
            ax.set_xticks([]); ax.set_yticks([])
            if col == 0:
                ax.set_ylabel(f"c{cls}", fontsize=8)
            if row == 0:
                ax.set_title("real", fontsize=8)
        for col in range(per_class):
            ax = axes[row][per_class + col]
            if col < len(gen_idx):
                ax.plot(pseudo[gen_idx[col]].numpy().T, linewidth=0.6)
            ax.set_xticks([]); ax.set_yticks([])
            if row == 0:
                ax.set_title("generated", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
