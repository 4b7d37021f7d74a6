"""Regression metrics and bootstrap prediction intervals.

Four metrics are reported per target: coefficient of determination (r2),
explained variance score (evs), mean absolute error (mae), and root mean
squared error (rmse). Each is bracketed by a (low, mid, top) interval:
mid is the metric on the full test set, low/top are the 2.5th/97.5th
percentiles (at the default 95% level) of a pairs bootstrap over the
test points. Replicates whose resampled actuals are constant cannot
support r2/evs and are skipped, with the skip count reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    AllReplicatesDegenerate,
    BadConfig,
    EmptyInput,
    LengthMismatch,
    ZeroVariance,
)
from .features import TARGET_COLUMNS
from .mtl import MonitoringPrediction, MtlModel, predict_monitoring, rows_to_targets

METRIC_NAMES: tuple[str, ...] = ("r2", "evs", "mae", "rmse")


def _check_pair(y, y_hat, min_len: int):
    y = np.asarray(y, dtype=np.float64).ravel()
    y_hat = np.asarray(y_hat, dtype=np.float64).ravel()
    if y.shape[0] != y_hat.shape[0]:
        raise LengthMismatch(f"{y.shape[0]} actuals vs {y_hat.shape[0]} predictions")
    if y.shape[0] == 0:
        raise EmptyInput("metric inputs are empty")
    if y.shape[0] < min_len:
        raise LengthMismatch(f"need at least {min_len} points, got {y.shape[0]}")
    return y, y_hat


def r2(y, y_hat) -> float:
    """1 - SS_res / SS_tot; 1.0 is a perfect fit, 0.0 matches the mean predictor."""
    y, y_hat = _check_pair(y, y_hat, 2)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVariance("actuals are constant; r2 is undefined")
    return 1.0 - float(np.sum((y - y_hat) ** 2)) / ss_tot


def evs(y, y_hat) -> float:
    """Explained variance, 1 - Var(residuals)/Var(actuals); shift-invariant."""
    y, y_hat = _check_pair(y, y_hat, 2)
    var_y = float(np.var(y))
    if var_y == 0.0:
        raise ZeroVariance("actuals are constant; explained variance is undefined")
    return 1.0 - float(np.var(y - y_hat)) / var_y


def mae(y, y_hat) -> float:
    y, y_hat = _check_pair(y, y_hat, 1)
    return float(np.mean(np.abs(y - y_hat)))


def rmse(y, y_hat) -> float:
    y, y_hat = _check_pair(y, y_hat, 1)
    return math.sqrt(float(np.mean((y - y_hat) ** 2)))


METRIC_FUNCTIONS: dict[str, Callable] = {"r2": r2, "evs": evs, "mae": mae, "rmse": rmse}


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 1000
    confidence: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.replicates < 1:
            raise BadConfig(f"bootstrap replicates must be >= 1, got {self.replicates}")
        if not 0.0 < self.confidence < 1.0:
            raise BadConfig(f"confidence must be in (0, 1), got {self.confidence}")


@dataclass(frozen=True)
class Interval:
    """(low, mid, top) bracket for one metric.

    ``skipped_replicates`` counts degenerate resamples; ``degenerate`` is
    set when fewer than 2 replicates survived, in which case low <= mid
    <= top is not guaranteed.
    """

    low: float
    mid: float
    top: float
    skipped_replicates: int = 0
    degenerate: bool = False


def bootstrap_interval(y, y_hat, metric: Callable, cfg: BootstrapConfig) -> Interval:
    """Pairs bootstrap of a metric over (actual, prediction) index pairs.

    mid is the metric on the full sample; low/top are percentile bounds
    of the replicate distribution. Replicate index draws come from
    per-replicate generators spawned off the master seed, so a parallel
    evaluation would reproduce the serial numbers exactly.
    """
    y, y_hat = _check_pair(y, y_hat, 2)
    mid = metric(y, y_hat)

    n = y.shape[0]
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.replicates)
    values = []
    skipped = 0
    for child in children:
        rng = np.random.default_rng(child)
        idx = rng.integers(0, n, size=n)
        try:
            values.append(metric(y[idx], y_hat[idx]))
        except ZeroVariance:
            skipped += 1
    if not values:
        raise AllReplicatesDegenerate(
            f"all {cfg.replicates} bootstrap replicates had constant actuals")

    alpha = 1.0 - cfg.confidence
    low, top = np.percentile(values, [100 * alpha / 2, 100 * (1 - alpha / 2)])
    return Interval(float(low), mid, float(top),
                    skipped_replicates=skipped, degenerate=len(values) < 2)


@dataclass(frozen=True)
class MetricReport:
    """All metric intervals for one (region, test window) evaluation."""

    region: str
    intervals: dict[str, dict[str, Interval]]   # target -> metric -> Interval
    training_time_seconds: float

    def interval(self, target: str, metric: str) -> Interval:
        return self.intervals[target][metric]

    def to_long_rows(self) -> list[dict]:
        """Long-format rows: one per (target, metric)."""
        rows = []
        for target in self.intervals:
            for metric, iv in self.intervals[target].items():
                rows.append({
                    "province": self.region,
                    "target": target,
                    "metric": metric,
                    "low": iv.low,
                    "mid": iv.mid,
                    "top": iv.top,
                    "tt_seconds": self.training_time_seconds,
                })
        return rows

    def to_json_dict(self) -> dict:
        return {
            "province": self.region,
            "training_time_seconds": self.training_time_seconds,
            "targets": {
                target: {
                    metric: {"low": iv.low, "mid": iv.mid, "top": iv.top,
                             "skipped_replicates": iv.skipped_replicates}
                    for metric, iv in metrics.items()
                }
                for target, metrics in self.intervals.items()
            },
        }


def evaluate_model(
    model: MtlModel,
    test_rows: Sequence,
    cfg: BootstrapConfig = BootstrapConfig(),
    training_time_seconds: float = 0.0,
) -> MetricReport:
    """Predict the held-out rows and report bootstrap intervals per target.

    Metrics are computed on inverse-scaled counts, not on the [0, 1]
    training scale, so error magnitudes are comparable across regions.
    Test rows must be disjoint from the rows the model trained on.
    """
    test_rows = list(test_rows)
    prediction: MonitoringPrediction = predict_monitoring(model, test_rows)
    actuals = rows_to_targets(test_rows).values

    parent = np.random.SeedSequence(cfg.seed)
    combo_seeds = parent.spawn(len(TARGET_COLUMNS) * len(METRIC_NAMES))
    intervals: dict[str, dict[str, Interval]] = {}
    combo = 0
    for t_idx, target in enumerate(TARGET_COLUMNS):
        per_metric: dict[str, Interval] = {}
        for metric_name in METRIC_NAMES:
            child_seed = int(combo_seeds[combo].generate_state(1, np.uint64)[0])
            combo += 1
            per_metric[metric_name] = bootstrap_interval(
                actuals[:, t_idx],
                prediction.counts[:, t_idx],
                METRIC_FUNCTIONS[metric_name],
                BootstrapConfig(cfg.replicates, cfg.confidence, child_seed),
            )
        intervals[target] = per_metric
    return MetricReport(model.case_study.name, intervals, training_time_seconds)


def reports_to_long_csv(reports: Sequence[MetricReport]) -> str:
    """Long-format CSV: province,target,metric,low,mid,top,tt_seconds."""
    lines = ["province,target,metric,low,mid,top,tt_seconds"]
    for report in reports:
        for row in report.to_long_rows():
            lines.append(
                f"{row['province']},{row['target']},{row['metric']},"
                f"{row['low']:.6f},{row['mid']:.6f},{row['top']:.6f},"
                f"{row['tt_seconds']:.3f}")
    return "\n".join(lines) + "\n"


def reports_to_target_table(reports: Sequence[MetricReport], target: str) -> str:
    """Wide per-target CSV: one province row, every metric interval as columns."""
    header = ["province"]
    for metric in METRIC_NAMES:
        header += [f"{metric}_low", f"{metric}_mid", f"{metric}_top"]
    header.append("tt_seconds")
    lines = [",".join(header)]
    for report in reports:
        cells = [report.region]
        for metric in METRIC_NAMES:
            iv = report.interval(target, metric)
            cells += [f"{iv.low:.6f}", f"{iv.mid:.6f}", f"{iv.top:.6f}"]
        cells.append(f"{report.training_time_seconds:.3f}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def report_to_single_region_table(report: MetricReport) -> str:
    """Wide single-region CSV: one row per target."""
    header = ["province", "target"]
    for metric in METRIC_NAMES:
        header += [f"{metric}_low", f"{metric}_mid", f"{metric}_top"]
    header.append("tt_seconds")
    lines = [",".join(header)]
    for target in report.intervals:
        cells = [report.region, target]
        for metric in METRIC_NAMES:
            iv = report.interval(target, metric)
            cells += [f"{iv.low:.6f}", f"{iv.mid:.6f}", f"{iv.top:.6f}"]
        cells.append(f"{report.training_time_seconds:.3f}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
