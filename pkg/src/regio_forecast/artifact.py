"""Model artifact I/O: one JSON document per trained model.

The document embeds everything needed to predict: kNN config, selected
feature codes, both fitted scalers, both instance stores, the case-study
region, and the generic transfer weight. Serialization is deterministic
(sorted keys, shortest round-trip float repr), so retraining on identical
inputs produces byte-identical artifacts.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .errors import DataError, VersionMismatch
from .ingest import RegionId
from .knn import InstanceStore, KnnConfig
from .mtl import MtlModel
from .scaling import MinMaxScalerState, QuantileNormalScaler

ARTIFACT_VERSION = "1"


def model_to_dict(model: MtlModel) -> dict:
    return {
        "version": ARTIFACT_VERSION,
        "config": model.cfg.to_json_dict(),
        "selected_features": list(model.selected_features),
        "generic_weight": model.generic_weight,
        "case_study": {"code": model.case_study.code, "name": model.case_study.name},
        "feature_scaler": model.feature_scaler.to_json_dict(),
        "target_scaler": model.target_scaler.to_json_dict(),
        "generic_store": model.generic_store.to_json_dict(),
        "dedicated_store": model.dedicated_store.to_json_dict(),
    }


def model_from_dict(doc: dict) -> MtlModel:
    version = doc.get("version")
    if version != ARTIFACT_VERSION:
        raise VersionMismatch(version, ARTIFACT_VERSION)
    try:
        case = doc["case_study"]
        return MtlModel(
            generic_store=InstanceStore.from_json_dict(doc["generic_store"]),
            dedicated_store=InstanceStore.from_json_dict(doc["dedicated_store"]),
            feature_scaler=QuantileNormalScaler.from_json_dict(doc["feature_scaler"]),
            target_scaler=MinMaxScalerState.from_json_dict(doc["target_scaler"]),
            selected_features=tuple(doc["selected_features"]),
            cfg=KnnConfig.from_json_dict(doc["config"]),
            generic_weight=float(doc["generic_weight"]),
            case_study=RegionId(int(case["code"]), case["name"]),
        )
    except KeyError as exc:
        raise DataError(f"model artifact is missing field {exc}") from None


def dumps_model(model: MtlModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))


def save_model(model: MtlModel, path: str | Path) -> None:
    atomic_write_text(path, dumps_model(model))


def load_model(path: str | Path) -> MtlModel:
    with Path(path).open(encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
