"""Daily PPE-kit demand prediction for community health centres.

The kit estimate interpolates on the predicted hospitalized count: the
average hospitalized patients per health centre (``hsp_ratio``) scales
the active workforce until every centre has at least one patient, at
which point demand saturates at operating_capacity x personnel. One kit
bundles five items: face shield, N95 respirator, glove pair, shoe-cover
pair, and isolation gown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadConfig, InvalidCapacity, ZeroChcCount
from .ingest import DataRow
from .mtl import MtlModel, predict_monitoring


@dataclass(frozen=True)
class KitComposition:
    """Item multipliers per kit; defaults describe the standard 5-item kit."""

    face_shields: int = 1
    n95_respirators: int = 1
    glove_pairs: int = 1
    shoe_cover_pairs: int = 1
    isolation_gowns: int = 1

    def __post_init__(self):
        for name, mult in self.as_dict().items():
            if mult < 0:
                raise BadConfig(f"kit item multiplier {name} must be >= 0")

    def as_dict(self) -> dict[str, int]:
        return {
            "face_shields": self.face_shields,
            "n95_respirators": self.n95_respirators,
            "glove_pairs": self.glove_pairs,
            "shoe_cover_pairs": self.shoe_cover_pairs,
            "isolation_gowns": self.isolation_gowns,
        }


@dataclass(frozen=True)
class PpeInputs:
    """One day's inputs to the kit-demand rule."""

    hospitalized: float            # predicted hospitalized patients
    chc_count: int                 # community health centres in the region
    operating_capacity: float      # active fraction of the workforce, in [0, 1]
    personnel: float               # frontline workforce headcount

    def __post_init__(self):
        if not 0.0 <= self.operating_capacity <= 1.0:
            raise InvalidCapacity(
                f"operating capacity must be in [0, 1], got {self.operating_capacity}")
        if self.chc_count < 1:
            raise ZeroChcCount(f"health centre count must be >= 1, got {self.chc_count}")
        if self.hospitalized < 0:
            raise BadConfig(f"hospitalized count must be >= 0, got {self.hospitalized}")
        if self.personnel < 0:
            raise BadConfig(f"personnel must be >= 0, got {self.personnel}")


def predict_ppe_kits(inputs: PpeInputs) -> float:
    """Kit demand for one day.

    With r = hospitalized / chc_count: demand is capacity x personnel x r
    while r <= 1, and saturates at capacity x personnel once every centre
    has a patient. Both branches agree at r = 1.
    """
    ratio = inputs.hospitalized / inputs.chc_count
    ceiling = inputs.operating_capacity * inputs.personnel
    if ratio > 1.0:
        return ceiling * 1.0
    return ceiling * ratio


def expand_kit_items(kits: float, comp: KitComposition = KitComposition()) -> dict[str, int]:
    """Whole-item demand: kits are ceiled first (no fractional physical items)."""
    if kits < 0:
        raise BadConfig(f"kit count must be >= 0, got {kits}")
    whole = math.ceil(kits)
    return {name: whole * mult for name, mult in comp.as_dict().items()}


@dataclass(frozen=True)
class PpeDayForecast:
    date: object                   # datetime.date
    predicted_hospitalized: float
    hsp_ratio: float
    kits: float
    kits_ceil: int
    items: dict[str, int]


PPE_CSV_HEADER = ("date,predicted_hospitalized,hsp_ratio,kits,kits_ceil,"
                  "face_shields,n95,glove_pairs,shoe_cover_pairs,gowns")


def forecast_series(
    model: MtlModel,
    rows: Sequence[DataRow],
    operating_capacity: float | Sequence[float],
    personnel: float | Sequence[float],
    comp: KitComposition = KitComposition(),
) -> list[PpeDayForecast]:
    """Chain the monitoring model's hospitalization predictions into kit demand.

    ``operating_capacity`` and ``personnel`` may be constants or one value
    per row. The health centre count is read from each row's feat_11.
    """
    rows = list(rows)
    n = len(rows)
    caps = _broadcast(operating_capacity, n, "operating_capacity")
    staff = _broadcast(personnel, n, "personnel")

    hospitalized = predict_monitoring(model, rows).column("hospitalizations")
    out = []
    for row, h, cap, p in zip(rows, hospitalized, caps, staff):
        chc = int(round(row.feature("feat_11")))
        inputs = PpeInputs(float(h), chc, float(cap), float(p))
        kits = predict_ppe_kits(inputs)
        out.append(PpeDayForecast(
            date=row.date,
            predicted_hospitalized=float(h),
            hsp_ratio=float(h) / chc,
            kits=kits,
            kits_ceil=math.ceil(kits),
            items=expand_kit_items(kits, comp),
        ))
    return out


def forecast_to_csv(series: Sequence[PpeDayForecast]) -> str:
    lines = [PPE_CSV_HEADER]
    for day in series:
        items = day.items
        lines.append(
            f"{day.date.isoformat()},{day.predicted_hospitalized:.6f},"
            f"{day.hsp_ratio:.6f},{day.kits:.6f},{day.kits_ceil},"
            f"{items['face_shields']},{items['n95_respirators']},"
            f"{items['glove_pairs']},{items['shoe_cover_pairs']},"
            f"{items['isolation_gowns']}")
    return "\n".join(lines) + "\n"


def _broadcast(value, n: int, name: str) -> np.ndarray:
    if np.isscalar(value):
        return np.full(n, float(value))
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (n,):
        raise BadConfig(f"{name} series has {arr.shape[0]} entries for {n} rows")
    return arr
