"""Command-line interface.

    timecil run --config PATH [--seeds N] [--out DIR]
    timecil tune --config PATH --protocol {a,b}
    timecil ablate --kind {memory_budget,classifier,normalization} --config PATH
    timecil report --out DIR [--format {md,csv}] [--plots]
    timecil datasets list
    timecil datasets prepare NAME --root DIR

Exit codes: 0 success, 1 run failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..data.loaders import DATASET_NAMES, EXPECTED_SHAPES, load_dataset
from ..data.cache import cache_path, preprocessing_hash, save_dataset_cache
from ..errors import ConfigError, TimecilError
from .ablation import ABLATION_AXES, ablation_sweep
from .config import ExperimentConfig
from .experiment import build_streams, run_experiment
from .report import collect_reports, plot_accuracy_evolution, render_table
from .tuning import tune_protocol_a, tune_protocol_b

EXIT_OK = 0
EXIT_RUN_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timecil",
                                     description="class-incremental learning for time series")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a multi-seed experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seeds", type=int, default=None, help="override seed count")
    p_run.add_argument("--out", default=None, help="override output directory")

    p_tune = sub.add_parser("tune", help="grid-search hyperparameters")
    p_tune.add_argument("--config", required=True)
    p_tune.add_argument("--protocol", choices=["a", "b"], required=True)

    p_abl = sub.add_parser("ablate", help="sweep one experiment axis")
    p_abl.add_argument("--kind", choices=sorted(ABLATION_AXES), required=True)
    p_abl.add_argument("--config", required=True)

    p_rep = sub.add_parser("report", help="summarize persisted results")
    p_rep.add_argument("--out", required=True, help="results directory to scan")
    p_rep.add_argument("--format", choices=["md", "csv"], default="md")
    p_rep.add_argument("--plots", action="store_true")

    p_ds = sub.add_parser("datasets", help="list or prepare datasets")
    ds_sub = p_ds.add_subparsers(dest="ds_command", required=True)
    ds_sub.add_parser("list")
    p_prep = ds_sub.add_parser("prepare", help="load, validate, and cache a dataset")
    p_prep.add_argument("name")
    p_prep.add_argument("--root", required=True)
    p_prep.add_argument("--cache-dir", default=None)

    return parser


def _load_config(path: str, seeds=None, out=None) -> ExperimentConfig:
    cfg = ExperimentConfig.from_yaml(path)
    data = cfg.to_dict()
    if seeds is not None:
        data["seeds"] = seeds
    if out is not None:
        data["out_dir"] = out
    return ExperimentConfig.from_dict(data)


def _cmd_run(args) -> int:
    cfg = _load_config(args.config, args.seeds, args.out)
    report = run_experiment(cfg)
    print(json.dumps(report.to_dict(), indent=2))
    failed = [r for r in report.results if r.status != "ok"]
    return EXIT_RUN_FAILURE if len(failed) == len(report.results) else EXIT_OK


def _cmd_tune(args) -> int:
    cfg = _load_config(args.config)
    dataset = load_dataset(cfg.dataset, cfg.data_root, cfg.synthetic_config())
    seed = cfg.seed_list[0]
    val_stream, exp_stream, _ = build_streams(cfg, dataset, seed)
    if args.protocol == "a":
        best = tune_protocol_a(exp_stream, cfg)
    else:
        if val_stream is None:
            raise ConfigError("protocol B needs a stream of more than 4 tasks")
        best = tune_protocol_b(val_stream, cfg)
    print(json.dumps({"best_hyperparams": best}, indent=2))
    return EXIT_OK


def _cmd_ablate(args) -> int:
    cfg = _load_config(args.config)
    combined = ablation_sweep(args.kind, cfg)
    print(json.dumps({p["value"]: p["report"]["A_T"] for p in combined["points"]},
                     indent=2, default=str))
    return EXIT_OK


def _cmd_report(args) -> int:
    reports = collect_reports(args.out)
    if not reports:
        print(f"no report.json files under {args.out}", file=sys.stderr)
        return EXIT_RUN_FAILURE
    print(render_table(reports, args.format), end="")
    if args.plots:
        plot_path = Path(args.out) / "accuracy_evolution.png"
        plot_accuracy_evolution(reports, plot_path)
        print(f"wrote {plot_path}", file=sys.stderr)
    return EXIT_OK


def _cmd_datasets(args) -> int:
    if args.ds_command == "list":
        for name in DATASET_NAMES:
            shape = EXPECTED_SHAPES.get(name)
            print(f"{name}\t{'configurable' if shape is None else f'{shape[0]}x{shape[1]}'}")
        return EXIT_OK
    dataset = load_dataset(args.name, args.root)
    recipe = preprocessing_hash({"dataset": dataset.name, "version": 1})
    cache_dir = args.cache_dir or (Path(args.root) / "cache")
    path = cache_path(cache_dir, dataset.name, recipe)
    save_dataset_cache(path, dataset, recipe)
    print(f"cached {dataset.name} ({len(dataset.train)} train / {len(dataset.test)} test) at {path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "tune": _cmd_tune,
        "ablate": _cmd_ablate,
        "report": _cmd_report,
        "datasets": _cmd_datasets,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except TimecilError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILURE


if __name__ == "__main__":
    sys.exit(main())
