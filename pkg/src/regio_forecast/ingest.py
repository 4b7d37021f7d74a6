"""Reading, validating, splitting, and pooling regional daily datasets.

One CSV per region, UTF-8, comma-separated, with the exact header::

    date,feat_01,...,feat_27,infections,hospitalizations,recoveries,deaths

Dates are ISO-8601. A cell may be empty in real-world exports; empty cells
are forward-filled from the previous day within the same column, and a
file whose first row has an empty cell is rejected (daily administrative
series behave like step functions, so the previous value is the best
available estimate).
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadTestSize,
    BadValue,
    DataError,
    DuplicateDate,
    EmptyFile,
    EmptyPool,
    MissingColumn,
)
from .features import PRIMARY_FEATURE_CODES, TARGET_COLUMNS, FeatureMatrix, TargetMatrix

CSV_HEADER: tuple[str, ...] = ("date",) + PRIMARY_FEATURE_CODES + TARGET_COLUMNS

# feat_04 numeric encoding of each region.
REGION_ENCODINGS: dict[int, str] = {
    0: "Alberta",
    1: "British Columbia",
    2: "Manitoba",
    3: "New Brunswick",
    4: "Newfoundland and Labrador",
    5: "Nova Scotia",
    6: "Ontario",
    7: "Prince Edward Island",
    8: "Quebec",
    9: "Saskatchewan",
}

# Enumerated value sets for the categorical features.
CATEGORICAL_RANGES: dict[str, frozenset[int]] = {
    "feat_02": frozenset({1, 2, 3, 4}),       # season
    "feat_04": frozenset(REGION_ENCODINGS),   # region code
    "feat_05": frozenset({1, 2}),             # pandemic wave
    "feat_07": frozenset({1, 2, 3}),          # lockdown stage
    "feat_08": frozenset({0, 1, 2}),          # travel restrictions
    "feat_09": frozenset({0, 1}),             # face covering mandate
    "feat_10": frozenset({0, 1}),             # holiday flag
}


def normalize_region_name(name: str) -> str:
    return name.strip().lower().replace("_", " ").replace("-", " ")


@dataclass(frozen=True)
class RegionId:
    """One of the ten encoded regions; code and name must agree."""

    code: int
    name: str

    def __post_init__(self):
        if self.code not in REGION_ENCODINGS:
            raise DataError(f"unknown region code: {self.code}")
        if normalize_region_name(self.name) != normalize_region_name(REGION_ENCODINGS[self.code]):
            raise DataError(
                f"region name {self.name!r} does not match encoding {self.code} "
                f"({REGION_ENCODINGS[self.code]!r})")
        object.__setattr__(self, "name", REGION_ENCODINGS[self.code])

    @property
    def file_stem(self) -> str:
        return self.name.lower().replace(" ", "_")


def region_by_code(code: int) -> RegionId:
    if code not in REGION_ENCODINGS:
        raise DataError(f"unknown region code: {code}")
    return RegionId(code, REGION_ENCODINGS[code])


def region_by_name(name: str) -> RegionId:
    wanted = normalize_region_name(name)
    for code, canonical in REGION_ENCODINGS.items():
        if normalize_region_name(canonical) == wanted:
            return RegionId(code, canonical)
    raise DataError(f"unknown region name: {name!r}")


@dataclass(frozen=True, eq=False)
class DataRow:
    """One day of a regional dataset: 27 features plus the 4 target counts."""

    date: dt.date
    features: np.ndarray          # (27,) float64, ordered by PRIMARY_FEATURE_CODES
    targets: np.ndarray           # (4,) int64, ordered by TARGET_COLUMNS

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        t = np.asarray(self.targets, dtype=np.int64)
        if f.shape != (len(PRIMARY_FEATURE_CODES),):
            raise DataError(f"expected {len(PRIMARY_FEATURE_CODES)} features, got {f.shape}")
        if t.shape != (len(TARGET_COLUMNS),):
            raise DataError(f"expected {len(TARGET_COLUMNS)} targets, got {t.shape}")
        f.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "targets", t)

    def feature(self, code: str) -> float:
        return float(self.features[PRIMARY_FEATURE_CODES.index(code)])


@dataclass(frozen=True, eq=False)
class RegionalDataset:
    """All daily rows for one region, ordered by date."""

    region: RegionId
    rows: tuple[DataRow, ...]

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def dates(self) -> tuple[dt.date, ...]:
        return tuple(r.date for r in self.rows)

    def feature_matrix(self) -> FeatureMatrix:
        return FeatureMatrix(np.vstack([r.features for r in self.rows]),
                             PRIMARY_FEATURE_CODES)

    def target_matrix(self) -> TargetMatrix:
        return TargetMatrix(np.vstack([r.targets for r in self.rows]).astype(np.float64),
                            TARGET_COLUMNS)

    def subset(self, indices: Sequence[int]) -> "RegionalDataset":
        return RegionalDataset(self.region, tuple(self.rows[i] for i in indices))


def _check_categorical(value: float, code: str, row_number: int) -> None:
    allowed = CATEGORICAL_RANGES.get(code)
    if allowed is None:
        return
    if value != int(value) or int(value) not in allowed:
        raise BadValue(row_number, code,
                       f"{value} not in enumerated range {sorted(allowed)}")


def parse_regional_csv(path: str | Path, region: RegionId) -> RegionalDataset:
    """Parse and validate one region's CSV into a RegionalDataset.

    Rows come back sorted by date. Raises MissingColumn, BadValue,
    DuplicateDate, or EmptyFile on schema or content violations.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        header = tuple(h.strip() for h in header)
        for col in CSV_HEADER:
            if col not in header:
                raise MissingColumn(col)
        if header != CSV_HEADER:
            raise DataError(
                "header columns out of order or extra; expected exactly: "
                + ",".join(CSV_HEADER))

        rows: list[DataRow] = []
        previous: list[float] | None = None
        for row_number, record in enumerate(reader, start=1):
            if not record or all(cell.strip() == "" for cell in record):
                continue
            if len(record) != len(CSV_HEADER):
                raise BadValue(row_number, "row",
                               f"expected {len(CSV_HEADER)} cells, got {len(record)}")
            try:
                date = dt.date.fromisoformat(record[0].strip())
            except ValueError:
                raise BadValue(row_number, "date", record[0]) from None

            cells: list[float] = []
            for offset, code in enumerate(PRIMARY_FEATURE_CODES + TARGET_COLUMNS, start=1):
                text = record[offset].strip()
                if text == "":
                    if previous is None:
                        raise BadValue(row_number, code,
                                       "missing cell in first data row (nothing to forward-fill)")
                    cells.append(previous[offset - 1])
                    continue
                try:
                    value = float(text)
                except ValueError:
                    raise BadValue(row_number, code, text) from None
                cells.append(value)

            features = cells[:len(PRIMARY_FEATURE_CODES)]
            target_vals = cells[len(PRIMARY_FEATURE_CODES):]
            for code, value in zip(PRIMARY_FEATURE_CODES, features):
                _check_categorical(value, code, row_number)
            for name, value in zip(TARGET_COLUMNS, target_vals):
                if value != int(value):
                    raise BadValue(row_number, name, f"{value} is not an integer count")
                if value < 0:
                    raise BadValue(row_number, name, f"{value} is negative")
            previous = cells
            rows.append(DataRow(date, np.array(features),
                                np.array([int(v) for v in target_vals])))

    if not rows:
        raise EmptyFile(f"{path} has a header but no data rows")
    rows.sort(key=lambda r: r.date)
    for a, b in zip(rows, rows[1:]):
        if a.date == b.date:
            raise DuplicateDate(a.date)
    return RegionalDataset(region, tuple(rows))


def write_regional_csv(ds: RegionalDataset, path: str | Path) -> None:
    """Serialize a dataset in the exact ingest schema (round-trips losslessly)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in ds.rows:
            writer.writerow(
                [row.date.isoformat()]
                + [repr(float(v)) for v in row.features]
                + [int(v) for v in row.targets]
            )


@dataclass(frozen=True)
class Violation:
    row: int | None
    field: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)


def validate_dataset(ds: RegionalDataset) -> ValidationReport:
    """Collect invariant violations; an empty report means the dataset is sound."""
    found: list[Violation] = []
    seen_dates: set[dt.date] = set()
    last_date: dt.date | None = None
    for i, row in enumerate(ds.rows):
        if row.date in seen_dates:
            found.append(Violation(i, "date", f"DuplicateDate: {row.date}"))
        elif last_date is not None and row.date < last_date:
            found.append(Violation(i, "date", f"dates not increasing at {row.date}"))
        seen_dates.add(row.date)
        if last_date is None or row.date > last_date:
            last_date = row.date
        for name, value in zip(TARGET_COLUMNS, row.targets):
            if value < 0:
                found.append(Violation(i, name, f"negative count {value}"))
        for code in CATEGORICAL_RANGES:
            value = row.feature(code)
            allowed = CATEGORICAL_RANGES[code]
            if value != int(value) or int(value) not in allowed:
                found.append(Violation(i, code, f"{value} outside enumerated range"))
        if not np.all(np.isfinite(row.features)):
            found.append(Violation(i, "features", "non-finite feature value"))
    return ValidationReport(tuple(found))


@dataclass(frozen=True)
class TrainTestSplit:
    """Disjoint train/test index sets into one regional dataset."""

    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int


def split_train_test(ds: RegionalDataset, test_size: int, seed: int) -> TrainTestSplit:
    """Sample ``test_size`` day indices uniformly without replacement.

    The same (dataset, test_size, seed) always produces the same split.
    """
    n = ds.n_rows
    if not 0 < test_size < n:
        raise BadTestSize(f"test_size must be in (0, {n}), got {test_size}")
    rng = np.random.default_rng(seed)
    test = np.sort(rng.choice(n, size=test_size, replace=False))
    mask = np.ones(n, dtype=bool)
    mask[test] = False
    train = np.nonzero(mask)[0]
    return TrainTestSplit(tuple(int(i) for i in train),
                          tuple(int(i) for i in test), seed)


def pool_regions(
    datasets: Iterable[RegionalDataset],
    exclude: RegionId,
) -> list[tuple[RegionId, DataRow]]:
    """Concatenate rows from every dataset except the excluded region.

    Row provenance (the source region) is kept so instances can be
    weighted per source later.
    """
    pooled: list[tuple[RegionId, DataRow]] = []
    for ds in datasets:
        if ds.region.code == exclude.code:
            continue
        pooled.extend((ds.region, row) for row in ds.rows)
    if not pooled:
        raise EmptyPool("every dataset was excluded from the pool")
    return pooled
