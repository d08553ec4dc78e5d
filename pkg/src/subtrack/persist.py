"""On-disk formats for trained pipeline artifacts.

Everything is JSON or CSV. Floats are written with repr so reading a file
back reproduces the exact values that were written.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .config import RunConfig
from .dataset import Normalizer
from .errors import ValidationError
from .health import DistanceScaler, HiCurve, HiRegressor
from .multiscale import MultiModel, multimodel_from_dict, multimodel_to_dict
from .subspace import SubspaceModel, model_from_dict, model_to_dict

CURVE_CSV_HEADER = "unit_id,cycle,raw_dist,scaled_dist,sigma"
ESTIMATE_CSV_HEADER = (
    "unit_id,estimated_rul,true_rul,error,n_candidates,sum_similarity"
)


def normalizer_to_dict(norm: Normalizer) -> dict:
    return {
        "mean": norm.mean.tolist(),
        "std": norm.std.tolist(),
        "mask": norm.mask.astype(int).tolist(),
    }


def normalizer_from_dict(doc: dict) -> Normalizer:
    try:
        return Normalizer(
            mean=np.array(doc["mean"], dtype=float),
            std=np.array(doc["std"], dtype=float),
            mask=np.array(doc["mask"], dtype=bool),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed normalizer document: {exc}")


def scaler_to_dict(scaler: DistanceScaler) -> dict:
    return {"floor": scaler.floor, "ceiling": scaler.ceiling}


def scaler_from_dict(doc: dict) -> DistanceScaler:
    try:
        return DistanceScaler(floor=float(doc["floor"]), ceiling=float(doc["ceiling"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed scaler document: {exc}")


def regressor_to_dict(reg: HiRegressor) -> dict:
    return {"weights": reg.weights.tolist()}


def regressor_from_dict(doc: dict) -> HiRegressor:
    try:
        return HiRegressor(weights=np.array(doc["weights"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed regressor document: {exc}")


def save_any_model(model: SubspaceModel | MultiModel, path: str | Path) -> None:
    doc = (
        multimodel_to_dict(model)
        if isinstance(model, MultiModel)
        else model_to_dict(model)
    )
    Path(path).write_text(json.dumps(doc))


def load_any_model(path: str | Path) -> SubspaceModel | MultiModel:
    doc = json.loads(Path(path).read_text())
    if "models" in doc:
        return multimodel_from_dict(doc)
    return model_from_dict(doc)


def write_curves_csv(curves: list[HiCurve], path: str | Path) -> None:
    lines = [CURVE_CSV_HEADER]
    for c in curves:
        for i in range(len(c)):
            lines.append(
                f"{c.unit_id},{i + 1},{float(c.raw_dist[i])!r},"
                f"{float(c.scaled_dist[i])!r},{float(c.sigma[i])!r}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def read_curves_csv(path: str | Path) -> list[HiCurve]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CURVE_CSV_HEADER:
        raise ValidationError(f"{path}: not a health-index curve CSV")
    by_unit: dict[int, list[tuple[float, float, float]]] = {}
    for line in lines[1:]:
        if not line:
            continue
        unit, _, raw, scaled, sigma = line.split(",")
        by_unit.setdefault(int(unit), []).append(
            (float(raw), float(scaled), float(sigma))
        )
    curves = []
    for unit in sorted(by_unit):
        rows = by_unit[unit]
        curves.append(
            HiCurve(
                unit_id=unit,
                sigma=np.array([r[2] for r in rows]),
                raw_dist=np.array([r[0] for r in rows]),
                scaled_dist=np.array([r[1] for r in rows]),
            )
        )
    return curves


def write_estimates_csv(estimates, truths, path: str | Path, unit_ids=None) -> None:
    """truths may be None when ground truth is unavailable; a None estimate
    (no valid match for that unit) writes an empty row."""
    lines = [ESTIMATE_CSV_HEADER]
    for i, est in enumerate(estimates):
        truth = truths[i] if truths is not None else ""
        if est is None:
            unit = unit_ids[i] if unit_ids is not None else ""
            lines.append(f"{unit},,{truth},,0,0.0")
            continue
        err = repr(float(est.estimate - truths[i])) if truths is not None else ""
        lines.append(
            f"{est.unit_id},{float(est.estimate)!r},{truth},{err},"
            f"{len(est.candidates)},{float(est.sum_similarity)!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))


def load_config(path: str | Path) -> RunConfig:
    return RunConfig.from_dict(json.loads(Path(path).read_text()))
