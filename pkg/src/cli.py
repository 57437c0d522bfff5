#!/usr/bin/env python3
"""
gaitscope CLI
Usage: gaitscope <command> [options]
"""

import argparse
import csv
import json
import sys
import time
import uuid
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from rich.console import Console
from rich.table import Table

from .angle_features import angle_matrix, embed_array, normalize_over_frames
from .assessment.ados import predicted_class
from .assessment.clip_features import clip_feature_matrix
from .assessment.cross_validation import (
    cross_validate,
    fit_ados_regressor,
    write_fold_csv,
    write_per_score_csv,
    write_report_json,
)
from .assessment.svr import svr_predict
from .assessment.synth import synthesize
from .config import RunConfig
from .dataset_io import load_dataset, save_dataset
from .errors import ConfigError, GaitscopeError
from .gait_stats import companion_path, population_summary, save_summary, split_by_label
from .logger import MetricsLogger, clear_run_context, get_logger, set_run_context, setup_logging
from .models import Dataset
from .network.checkpoint import load_checkpoint, save_checkpoint
from .network.model import CLASS_NAMES
from .network.training import stack_sequences, train_classifier
from .preprocess import augment_dataset, preprocess_dataset
from .skepxel import build_image, generate_orderings

logger = get_logger("cli")
metrics = MetricsLogger()

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_DATA = 5

LOSS_COLUMNS = ("epoch", "loss", "classification_loss", "distance_loss")
PREDICTION_COLUMNS = (
    "record",
    "subject_id",
    "provenance",
    "predicted_label",
    "prob_asd",
    "ados_score",
    "ados_class",
)


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        prog="gaitscope",
        description="Skeleton gait and gesture analysis for autism screening research",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  gaitscope synth cohort.json --set synth.n_td=40 --set synth.n_asd=40
  gaitscope stats cohort.json report.csv
  gaitscope preprocess cohort.json prepared.json --augment
  gaitscope train prepared.json model.json --config run.env
  gaitscope evaluate prepared.json folds.csv --mode block
  gaitscope predict model.json cohort.json predictions.csv

Datasets written by preprocess are flagged as preprocessed and are read as they
are, so augmented copies reach train and evaluate intact. Other inputs are
preprocessed on load unless --raw is given.
        """,
    )
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        help="KEY=VALUE config file (default: $GAITSCOPE_CONFIG)",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one config key (repeatable)",
    )
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument(
        "--structured-logs",
        action="store_true",
        help="Output structured JSON logs instead of human-readable format",
    )
    parser.add_argument("--log-dir", type=Path, default=None, help="Also write JSON logs here")
    parser.add_argument(
        "--format",
        choices=("csv", "json"),
        default="csv",
        help="Format of tabular outputs (default: csv)",
    )

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("preprocess", help="Normalize a dataset (and optionally augment it)")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument(
        "--augment", action="store_true", help="Add the seven augmented variants per record"
    )

    p = sub.add_parser("features", help="Write angle matrices and embedded streams")
    p.add_argument("input", type=Path)
    p.add_argument("output_dir", type=Path)
    _add_raw_flag(p)

    p = sub.add_parser("skepxel", help="Export Skepxel images per record")
    p.add_argument("input", type=Path)
    p.add_argument("output_dir", type=Path)
    p.add_argument("--png", action="store_true", help="Also write an 8-bit PNG preview")
    _add_raw_flag(p)

    p = sub.add_parser("stats", help="Compare gait statistics of the TD and ASD groups")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument(
        "--reference",
        choices=("vertical", "spine"),
        default="vertical",
        help="Axis the joint angles are measured against",
    )
    p.add_argument(
        "--plane",
        choices=("sagittal", "3d"),
        default="sagittal",
        help="Signed forward lean (sagittal) or plain 3D angle to the axis",
    )
    _add_raw_flag(p)

    p = sub.add_parser("train", help="Train the classifier and the ADOS regressor")
    p.add_argument("input", type=Path)
    p.add_argument("checkpoint", type=Path)
    p.add_argument(
        "--losses", type=Path, default=None, help="Loss history file (default: <checkpoint>.losses.csv)"
    )
    _add_raw_flag(p)

    p = sub.add_parser("evaluate", help="Subject-level cross-validation report")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--mode", choices=("random", "block"), default=None)
    _add_raw_flag(p)

    p = sub.add_parser("predict", help="Predict labels and ADOS scores with a checkpoint")
    p.add_argument("checkpoint", type=Path)
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    _add_raw_flag(p)

    p = sub.add_parser("synth", help="Generate a synthetic TD/ASD gait dataset")
    p.add_argument("output", type=Path)

    return parser


def _add_raw_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--raw",
        action="store_true",
        help="Treat an unflagged input as already preprocessed",
    )


def _load(args: argparse.Namespace, config: RunConfig) -> Dataset:
    ds = load_dataset(args.input)
    if getattr(args, "raw", False):
        return replace(ds, preprocessed=True)
    return preprocess_dataset(ds, config.preprocess)


def _write_table(path: Path, columns: Sequence[str], rows: List[Sequence], fmt: str) -> None:
    if fmt == "json":
        records = [dict(zip(columns, row)) for row in rows]
        path.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
        return
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        writer.writerows(rows)


def _record_stem(index: int, subject_id: str) -> str:
    return f"{index:04d}_{subject_id}"


def cmd_preprocess(args, config: RunConfig, console: Console) -> None:
    ds = preprocess_dataset(load_dataset(args.input), config.preprocess)
    if args.augment:
        ds = augment_dataset(ds, config.seed, config.preprocess.augmentation)
    save_dataset(ds, args.output)
    console.print(f"Wrote {len(ds)} records to [cyan]{args.output}[/cyan]")


def cmd_features(args, config: RunConfig, console: Console) -> None:
    ds = _load(args, config)
    args.output_dir.mkdir(parents=True, exist_ok=True)
    for i, seq in enumerate(ds):
        stem = _record_stem(i, seq.subject_id)
        am = angle_matrix(normalize_over_frames(seq.data, config.preprocess.epsilon))
        am.to_csv(args.output_dir / f"{stem}.angles.csv", ds.topology.joint_names)
        np.save(args.output_dir / f"{stem}.embedded.npy", embed_array(seq.data, am.values))
    console.print(f"Wrote features of {len(ds)} records to [cyan]{args.output_dir}[/cyan]")


def cmd_skepxel(args, config: RunConfig, console: Console) -> None:
    ds = _load(args, config)
    cfg = config.skepxel
    orderings = generate_orderings(cfg.orderings, cfg.seed)
    args.output_dir.mkdir(parents=True, exist_ok=True)
    for i, seq in enumerate(ds):
        stem = _record_stem(i, seq.subject_id)
        image = build_image(seq, cfg.orderings, cfg.frames, cfg.seed, orderings)
        image.save_npy(args.output_dir / f"{stem}.npy")
        if args.png:
            image.save_png(args.output_dir / f"{stem}.png")
    console.print(f"Wrote {len(ds)} Skepxel images to [cyan]{args.output_dir}[/cyan]")


def cmd_stats(args, config: RunConfig, console: Console) -> None:
    td, asd = split_by_label(_load(args, config))
    summary = population_summary(td, asd, reference=args.reference, plane=args.plane)
    written = save_summary(summary, args.output, args.format)

    table = Table(title="Median comparison")
    for column in ("metric", "TD median", "ASD median", "higher"):
        table.add_column(column)
    for row in summary.comparison:
        table.add_row(row.metric, f"{row.td_median:.4f}", f"{row.asd_median:.4f}", row.higher)
    console.print(table)
    console.print("Wrote " + ", ".join(f"[cyan]{p}[/cyan]" for p in written))


def cmd_train(args, config: RunConfig, console: Console) -> None:
    ds = _load(args, config)
    result = train_classifier(ds, config.network, config.skepxel)
    svr = fit_ados_regressor(ds, result.net, config)
    save_checkpoint(args.checkpoint, result.net, svr, config.svr)

    losses = args.losses or companion_path(args.checkpoint, "losses").with_suffix(
        f".{args.format}"
    )
    rows = [
        [epoch, total, ce, dist]
        for epoch, total, ce, dist in zip(
            range(1, len(result.history) + 1),
            result.history,
            result.classification_history,
            result.distance_history,
        )
    ]
    _write_table(losses, LOSS_COLUMNS, rows, args.format)
    console.print(
        f"Trained on {len(ds)} records, train accuracy "
        f"[bold]{result.train_accuracy:.3f}[/bold]; "
        f"ADOS regressor {'fitted' if svr is not None else 'skipped (fewer than 2 scores)'}"
    )
    console.print(f"Wrote [cyan]{args.checkpoint}[/cyan] and [cyan]{losses}[/cyan]")


def cmd_evaluate(args, config: RunConfig, console: Console) -> None:
    ds = _load(args, config)
    report = cross_validate(ds, config, args.mode)
    if args.format == "json":
        write_report_json(report, args.output)
        written = [args.output]
    else:
        per_score = companion_path(args.output, "per_score")
        write_fold_csv(report, args.output)
        write_per_score_csv(report, per_score)
        written = [args.output, per_score]

    table = Table(title=f"{report.mode} folds")
    for column in ("metric", "mean", "std", "max"):
        table.add_column(column)
    for metric, stats in report.summary().items():
        table.add_row(metric, *(f"{stats[k]:.4f}" for k in ("mean", "std", "max")))
    console.print(table)
    console.print("Wrote " + ", ".join(f"[cyan]{p}[/cyan]" for p in written))


def cmd_predict(args, config: RunConfig, console: Console) -> None:
    net, svr, svr_config = load_checkpoint(args.checkpoint)
    ds = _load(args, config)
    probs = net.predict_proba(net.prepare(stack_sequences(ds)))

    scores = [None] * len(ds)
    if svr is not None:
        svr_config = svr_config or config.svr
        features = clip_feature_matrix(ds, net, svr_config.clip_frames, svr_config.n_clips)
        scores = [float(s) for s in np.atleast_1d(svr_predict(svr, features))]

    rows = []
    for i, (seq, p, score) in enumerate(zip(ds, probs, scores)):
        ados_class = ""
        if score is not None and seq.ados is not None:
            ados_class = predicted_class(score, seq.ados.module_id, seq.ados.age_years).value
        rows.append(
            [
                i,
                seq.subject_id,
                seq.provenance,
                CLASS_NAMES[int(p > 0.5)],
                float(p),
                score,
                ados_class,
            ]
        )
    _write_table(args.output, PREDICTION_COLUMNS, rows, args.format)
    console.print(f"Wrote predictions for {len(ds)} records to [cyan]{args.output}[/cyan]")


def cmd_synth(args, config: RunConfig, console: Console) -> None:
    ds = synthesize(config.synth)
    save_dataset(ds, args.output)
    console.print(
        f"Wrote {config.synth.n_td} TD and {config.synth.n_asd} ASD subjects "
        f"to [cyan]{args.output}[/cyan]"
    )


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig, Console], None]] = {
    "preprocess": cmd_preprocess,
    "features": cmd_features,
    "skepxel": cmd_skepxel,
    "stats": cmd_stats,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "synth": cmd_synth,
}


def run(argv: Optional[Sequence[str]] = None, console: Optional[Console] = None) -> int:
    """Run one command and return its exit code."""
    console = console or Console()
    err_console = Console(stderr=True)
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging(args.debug, structured=args.structured_logs, log_dir=args.log_dir)
    set_run_context(f"{args.command}-{uuid.uuid4().hex[:8]}")
    stage = args.command
    start = time.time()
    try:
        config = (
            RunConfig.from_file(args.config, args.overrides)
            if args.config is not None
            else RunConfig.from_env(args.overrides)
        )
        COMMANDS[args.command](args, config, console)
    except ConfigError as e:
        err_console.print(f"[bold red]Configuration error in {stage}:[/bold red] {e}")
        return EXIT_CONFIG
    except OSError as e:
        err_console.print(f"[bold red]I/O error in {stage}:[/bold red] {e}")
        return EXIT_IO
    except (GaitscopeError, ValueError) as e:
        err_console.print(f"[bold red]{type(e).__name__} in {stage}:[/bold red] {e}")
        if args.debug:
            raise
        return EXIT_DATA
    except KeyboardInterrupt:
        err_console.print("\n[yellow]Cancelled by user[/yellow]")
        return EXIT_UNEXPECTED
    except Exception as e:
        logger.exception(f"Unexpected failure in {stage}")
        err_console.print(f"[bold red]Fatal error in {stage}:[/bold red] {e}")
        return EXIT_UNEXPECTED
    finally:
        clear_run_context()

    metrics.log_stage(stage, time.time() - start)
    return EXIT_OK


def main() -> None:
    """Main CLI entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
