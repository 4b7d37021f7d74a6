"""Command-line driver.

Subcommands: synth, train, evaluate, rotate, predict, ppe, relevance.
Configuration precedence is flag > config file (JSON via --config) >
built-in default, and every run's randomness flows from one master seed.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
error. Set REGIO_FORECAST_LOG to DEBUG/INFO/WARNING to control logging.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .artifact import atomic_write_text, load_model, save_model
from .errors import ConfigError, DataError
from .evaluation import (
    BootstrapConfig,
    evaluate_model,
    report_to_single_region_table,
    reports_to_long_csv,
    reports_to_target_table,
)
from .features import (
    DEFAULT_SELECTED_FEATURES,
    TARGET_COLUMNS,
    concat_features,
    compute_derived_features,
    score_relevance,
    select_features,
)
from .ingest import (
    REGION_ENCODINGS,
    RegionalDataset,
    normalize_region_name,
    parse_regional_csv,
    region_by_name,
    split_train_test,
)
from .knn import KnnConfig
from .mtl import predict_monitoring, rotate_regions, train_mtl
from .ppe import KitComposition, forecast_series, forecast_to_csv
from .synth import SyntheticSpec, write_region_files

log = logging.getLogger("regio_forecast")


@dataclass
class RunConfig:
    data_dir: str = "data"
    case_study: str = "Ontario"
    k: int = 6
    generic_weight: float = 1.0
    test_days: int = 54
    seed: int = 0
    bootstrap: int = 1000
    selection: str = "default"      # "default" (curated 13 columns) or "ranked"
    top_n: int = 13
    out: str = "out"
    ppe_operating_capacity: float = 0.75
    ppe_personnel: float = 200.0


def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = dataclasses.replace(cfg, **doc)
    overrides = {}
    for field in dataclasses.fields(RunConfig):
        value = getattr(args, field.name, None)
        if value is not None:
            overrides[field.name] = value
    return dataclasses.replace(cfg, **overrides)


def _load_datasets(data_dir: str) -> list[RegionalDataset]:
    root = Path(data_dir)
    if not root.is_dir():
        raise DataError(f"data directory not found: {root}")
    stems = {normalize_region_name(name): name for name in REGION_ENCODINGS.values()}
    datasets = []
    for path in sorted(root.glob("*.csv")):
        key = normalize_region_name(path.stem)
        if key not in stems:
            log.warning("skipping %s: not a known region file", path.name)
            continue
        region = region_by_name(stems[key])
        datasets.append(parse_regional_csv(path, region))
    if not datasets:
        raise DataError(f"no regional CSV files found in {root}")
    return datasets


def _require_case(datasets: list[RegionalDataset], cfg: RunConfig):
    case = region_by_name(cfg.case_study)
    if not any(ds.region.code == case.code for ds in datasets):
        raise DataError(
            f"case-study file missing: expected {case.file_stem}.csv in {cfg.data_dir}")
    return case


def _selection(cfg: RunConfig, datasets: list[RegionalDataset], case) -> tuple[str, ...]:
    if cfg.selection == "default":
        return DEFAULT_SELECTED_FEATURES
    if cfg.selection == "ranked":
        case_ds = next(d for d in datasets if d.region.code == case.code)
        primary = case_ds.feature_matrix()
        full = concat_features(primary, compute_derived_features(primary))
        report = score_relevance(full, case_ds.target_matrix())
        return select_features(full, report=report, top_n=cfg.top_n).column_codes
    raise ConfigError(f"selection must be 'default' or 'ranked', got {cfg.selection!r}")


def _train(cfg: RunConfig):
    datasets = _load_datasets(cfg.data_dir)
    case = _require_case(datasets, cfg)
    case_ds = next(d for d in datasets if d.region.code == case.code)
    split = split_train_test(case_ds, cfg.test_days, cfg.seed)
    selection = _selection(cfg, datasets, case)
    model, report = train_mtl(
        datasets, case, split.train_indices,
        KnnConfig(k=cfg.k), cfg.generic_weight, selection)
    return datasets, case, case_ds, split, model, report


def cmd_train(cfg: RunConfig) -> int:
    datasets, case, _, split, model, report = _train(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(model, out / "model.json")
    doc = report.to_json_dict()
    doc["case_study"] = case.name
    doc["pool_regions"] = sorted(
        ds.region.name for ds in datasets if ds.region.code != case.code)
    doc["test_days_held_out"] = len(split.test_indices)
    doc["seed"] = cfg.seed
    atomic_write_text(out / "train_report.json", json.dumps(doc, indent=2, sort_keys=True))
    log.info("model written to %s", out / "model.json")
    print(f"trained {case.name}: generic={report.generic_instances} "
          f"dedicated={report.dedicated_instances} -> {out / 'model.json'}")
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    _, case, case_ds, split, model, report = _train(cfg)
    test_rows = [case_ds.rows[i] for i in split.test_indices]
    metric_report = evaluate_model(
        model, test_rows,
        BootstrapConfig(cfg.bootstrap, 0.95, cfg.seed),
        training_time_seconds=report.total_fit_seconds)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "evaluation.csv",
                      report_to_single_region_table(metric_report))
    atomic_write_text(out / "evaluation_long.csv", reports_to_long_csv([metric_report]))
    atomic_write_text(out / "evaluation.json",
                      json.dumps(metric_report.to_json_dict(), indent=2, sort_keys=True))
    print(f"evaluated {case.name} on {len(test_rows)} held-out days -> {out}")
    return 0


def cmd_rotate(cfg: RunConfig) -> int:
    datasets = _load_datasets(cfg.data_dir)
    reports = rotate_regions(
        datasets, KnnConfig(k=cfg.k), cfg.test_days, cfg.seed,
        cfg.generic_weight, DEFAULT_SELECTED_FEATURES, cfg.bootstrap)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for target in TARGET_COLUMNS:
        atomic_write_text(out / f"monitoring_{target}.csv",
                          reports_to_target_table(reports, target))
    atomic_write_text(out / "rotation_long.csv", reports_to_long_csv(reports))
    atomic_write_text(
        out / "rotation.json",
        json.dumps([r.to_json_dict() for r in reports], indent=2, sort_keys=True))
    print(f"rotated {len(reports)} regions -> {out}")
    return 0


def cmd_predict(cfg: RunConfig, model_path: str, input_csv: str) -> int:
    model = load_model(model_path)
    ds = parse_regional_csv(input_csv, model.case_study)
    prediction = predict_monitoring(model, ds.rows)
    lines = ["date," + ",".join(TARGET_COLUMNS)
             + "," + ",".join(f"{t}_rounded" for t in TARGET_COLUMNS)]
    for i, row in enumerate(ds.rows):
        reals = ",".join(f"{v:.6f}" for v in prediction.counts[i])
        ints = ",".join(str(int(v)) for v in prediction.rounded[i])
        lines.append(f"{row.date.isoformat()},{reals},{ints}")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "predictions.csv", "\n".join(lines) + "\n")
    print(f"wrote {len(ds.rows)} prediction rows -> {out / 'predictions.csv'}")
    return 0


def cmd_ppe(cfg: RunConfig, model_path: str, input_csv: str) -> int:
    model = load_model(model_path)
    ds = parse_regional_csv(input_csv, model.case_study)
    series = forecast_series(model, ds.rows,
                             cfg.ppe_operating_capacity, cfg.ppe_personnel,
                             KitComposition())
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "ppe_forecast.csv", forecast_to_csv(series))
    print(f"wrote {len(series)} PPE demand rows -> {out / 'ppe_forecast.csv'}")
    return 0


def cmd_relevance(cfg: RunConfig) -> int:
    datasets = _load_datasets(cfg.data_dir)
    case = _require_case(datasets, cfg)
    case_ds = next(d for d in datasets if d.region.code == case.code)
    primary = case_ds.feature_matrix()
    full = concat_features(primary, compute_derived_features(primary))
    report = score_relevance(full, case_ds.target_matrix())
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "relevance.csv", report.to_csv_text())
    print(f"scored {full.n_columns} features for {case.name} -> {out / 'relevance.csv'}")
    return 0


def cmd_synth(cfg: RunConfig, regions: int, rows: int, noise: float) -> int:
    spec = SyntheticSpec(regions=regions, rows=rows, noise=noise, seed=cfg.seed)
    paths = write_region_files(spec, cfg.out)
    print(f"wrote {len(paths)} regional files -> {cfg.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regio-forecast",
        description="Regional epidemic monitoring and PPE demand prediction.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override it)")
    common.add_argument("--data-dir", dest="data_dir")
    common.add_argument("--case-study", dest="case_study")
    common.add_argument("--k", type=int)
    common.add_argument("--generic-weight", dest="generic_weight", type=float)
    common.add_argument("--test-days", dest="test_days", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--bootstrap", type=int)
    common.add_argument("--selection", choices=["default", "ranked"])
    common.add_argument("--top-n", dest="top_n", type=int)
    common.add_argument("--out")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("synth", parents=[common], help="generate synthetic regional CSVs")
    p.add_argument("--regions", type=int, default=7)
    p.add_argument("--rows", type=int, default=362)
    p.add_argument("--noise", type=float, default=0.05)
    sub.add_parser("train", parents=[common], help="train a model for the case study")
    sub.add_parser("evaluate", parents=[common], help="train and score held-out days")
    sub.add_parser("rotate", parents=[common],
                   help="evaluate every region as the case study")
    p = sub.add_parser("predict", parents=[common], help="predict daily counts")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p = sub.add_parser("ppe", parents=[common], help="predict daily PPE kit demand")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--capacity", dest="ppe_operating_capacity", type=float)
    p.add_argument("--personnel", dest="ppe_personnel", type=float)
    sub.add_parser("relevance", parents=[common],
                   help="export feature relevance scores")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("REGIO_FORECAST_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "synth":
            return cmd_synth(cfg, args.regions, args.rows, args.noise)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        if args.command == "rotate":
            return cmd_rotate(cfg)
        if args.command == "predict":
            return cmd_predict(cfg, args.model, args.input)
        if args.command == "ppe":
            return cmd_ppe(cfg, args.model, args.input)
        if args.command == "relevance":
            return cmd_relevance(cfg)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:   # noqa: BLE001 -- exit code 4 is the contract
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
