"""Health-index curve generation.

Raw subspace distances are smoothed, scaled into [0, 1] against fleet-level
healthy/failure reference levels, and mapped to a health index

    sigma = 1 - sqrt(scaled_distance),

so 1 means perfect health and 0 failure. A least-squares refinement maps the
low-dimensional subspace projections to health-index values (the "-LR"
variant), one regressor per regime when regime labels are supplied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .multiscale import MultiModel, assign_rows
from .subspace import SubspaceModel, mahalanobis_rows

RIDGE_JITTER = 1e-10


@dataclass(frozen=True)
class HiCurve:
    """Per-unit health-index series with the distances it was derived from."""

    unit_id: int
    sigma: np.ndarray
    raw_dist: np.ndarray
    scaled_dist: np.ndarray

    def __post_init__(self):
        if not len(self.sigma) == len(self.raw_dist) == len(self.scaled_dist):
            raise ValidationError("curve series must share length")

    def __len__(self) -> int:
        return len(self.sigma)


@dataclass(frozen=True)
class DistanceScaler:
    """Affine map from raw distance to [0, 1]: floor -> 0, ceiling -> 1."""

    floor: float
    ceiling: float

    def __post_init__(self):
        if not self.ceiling > self.floor >= 0:
            raise ValidationError(
                f"need ceiling > floor >= 0, got floor={self.floor} "
                f"ceiling={self.ceiling}"
            )


@dataclass(frozen=True)
class HiRegressor:
    """Affine least-squares map from subspace projections to health index.

    weights has shape (R, d+1): intercept last, one row per regime.
    """

    weights: np.ndarray

    @property
    def n_regimes(self) -> int:
        return self.weights.shape[0]

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1] - 1


def distance_series(model: SubspaceModel | MultiModel, rows: np.ndarray) -> np.ndarray:
    """One distance per cycle; the multi-model variant records the assigned minimum."""
    if isinstance(model, MultiModel):
        return assign_rows(model, rows)[1]
    return mahalanobis_rows(model, rows)


def analyze_rows(
    model: SubspaceModel | MultiModel, rows: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(raw distances, subspace projections, regime labels) for each row.

    Projections are taken in the assigned model's basis; labels are all zero
    for a single model.
    """
    rows = np.asarray(rows, dtype=float)
    if isinstance(model, MultiModel):
        labels, dists = assign_rows(model, rows)
        proj = np.empty((len(rows), model.models[0].subspace_dim))
        for k, m in enumerate(model.models):
            sel = labels == k
            if np.any(sel):
                proj[sel] = (rows[sel] - m.center) @ m.basis
        return dists, proj, labels
    dists = mahalanobis_rows(model, rows)
    proj = (rows - model.center) @ model.basis
    return dists, proj, np.zeros(len(rows), dtype=int)


def smooth(series: np.ndarray, factor: float) -> np.ndarray:
    """Exponential moving average; factor=1 is the identity."""
    if not 0.0 < factor <= 1.0:
        raise ValidationError("smoothing factor must be in (0, 1]")
    series = np.asarray(series, dtype=float)
    out = np.empty_like(series)
    if len(series) == 0:
        return out
    out[0] = series[0]
    for i in range(1, len(series)):
        out[i] = factor * series[i] + (1.0 - factor) * out[i - 1]
    return out


def fit_scaler(
    train_raw: list[np.ndarray],
    healthy_cycles: int,
    smooth_factor: float = 0.3,
) -> DistanceScaler:
    """Fleet-level reference distances from run-to-failure raw series.

    Floor: median over units of the mean distance in the healthy window.
    Ceiling: median over units of the smoothed distance at the final cycle.
    """
    if not train_raw:
        raise ValidationError("no training series")
    floors = [float(np.mean(s[:healthy_cycles])) for s in train_raw]
    ceilings = [float(smooth(s, smooth_factor)[-1]) for s in train_raw]
    floor = float(np.median(floors))
    ceiling = float(np.median(ceilings))
    if ceiling <= floor:
        raise ValidationError(
            f"degenerate fleet: failure-level distance {ceiling} does not "
            f"exceed healthy level {floor}"
        )
    return DistanceScaler(floor=floor, ceiling=ceiling)


def scale(scaler: DistanceScaler, raw: np.ndarray) -> np.ndarray:
    """Map raw distances into [0, 1], clamping out-of-range values."""
    raw = np.asarray(raw, dtype=float)
    return np.clip((raw - scaler.floor) / (scaler.ceiling - scaler.floor), 0.0, 1.0)


def to_health_index(scaled: np.ndarray) -> np.ndarray:
    """sigma = 1 - sqrt(scaled distance); requires input already in [0, 1]."""
    scaled = np.asarray(scaled, dtype=float)
    if np.any(scaled < 0) or np.any(scaled > 1):
        raise ValidationError("scaled distances must lie in [0, 1]")
    return 1.0 - np.sqrt(scaled)


def build_curve(
    unit_id: int,
    raw: np.ndarray,
    scaler: DistanceScaler,
    smooth_factor: float = 0.3,
) -> HiCurve:
    """Full raw-distance -> health-index pipeline for one unit."""
    smoothed = smooth(raw, smooth_factor)
    scaled = scale(scaler, smoothed)
    return HiCurve(
        unit_id=unit_id,
        sigma=to_health_index(scaled),
        raw_dist=np.asarray(raw, dtype=float),
        scaled_dist=scaled,
    )


def fit_hi_regression(
    projections: np.ndarray,
    targets: np.ndarray,
    labels: np.ndarray | None = None,
) -> HiRegressor:
    """Ordinary least squares (normal equations with a tiny ridge jitter)
    from projections to health-index targets; per regime when labels given."""
    projections = np.atleast_2d(np.asarray(projections, dtype=float))
    targets = np.asarray(targets, dtype=float)
    if len(projections) != len(targets):
        raise ValidationError("projections and targets must align")
    if np.any(targets < 0) or np.any(targets > 1):
        raise ValidationError("targets must lie in [0, 1]")
    d = projections.shape[1]
    if labels is None:
        labels = np.zeros(len(targets), dtype=int)
    labels = np.asarray(labels, dtype=int)
    n_regimes = int(labels.max()) + 1

    weights = np.zeros((n_regimes, d + 1))
    for r in range(n_regimes):
        sel = labels == r
        p, y = projections[sel], targets[sel]
        if len(p) < d + 1:
            raise ValidationError(
                f"regime {r}: {len(p)} samples for {d + 1} coefficients"
            )
        a = np.hstack([p, np.ones((len(p), 1))])
        gram = a.T @ a + RIDGE_JITTER * np.eye(d + 1)
        weights[r] = np.linalg.solve(gram, a.T @ y)
    return HiRegressor(weights=weights)


def predict_hi(
    reg: HiRegressor,
    projections: np.ndarray,
    labels: np.ndarray | None = None,
) -> np.ndarray:
    """Affine prediction clamped to [0, 1]."""
    projections = np.atleast_2d(np.asarray(projections, dtype=float))
    if projections.shape[1] != reg.input_dim:
        raise ValidationError(
            f"regressor expects dimension {reg.input_dim}, "
            f"got {projections.shape[1]}"
        )
    if reg.n_regimes > 1 and labels is None:
        raise ValidationError("per-regime regressor requires labels")
    if labels is None:
        labels = np.zeros(len(projections), dtype=int)
    labels = np.asarray(labels, dtype=int)
    w = reg.weights[labels]
    pred = np.sum(w[:, :-1] * projections, axis=1) + w[:, -1]
    return np.clip(pred, 0.0, 1.0)
