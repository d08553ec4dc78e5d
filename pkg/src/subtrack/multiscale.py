"""K-model tracking over operating regimes.

The operational-setting space is partitioned into K clusters; each cluster
owns a subspace model. A sample is scored against every model and routed to
the minimum-distance one, which is also the only model updated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .subspace import (
    MODEL_FORMAT_VERSION,
    SubspaceModel,
    TrainConfig,
    mahalanobis,
    mahalanobis_rows,
    model_from_dict,
    model_to_dict,
    update,
)


@dataclass(frozen=True)
class MultiModel:
    models: list[SubspaceModel]
    centroids: np.ndarray  # (K, n_settings)

    @property
    def n_regimes(self) -> int:
        return len(self.models)

    def validate(self) -> None:
        if not self.models:
            raise ValidationError("at least one model required")
        if len(self.centroids) != len(self.models):
            raise ValidationError("one centroid per model required")
        for m in self.models:
            m.validate()
        for i in range(len(self.centroids)):
            for j in range(i + 1, len(self.centroids)):
                if np.array_equal(self.centroids[i], self.centroids[j]):
                    raise ValidationError("centroids must be pairwise distinct")


def cluster_regimes(
    settings: np.ndarray, n_clusters: int, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded k-means (k-means++ init) over operational-setting vectors.

    Returns (labels, centroids). Empty clusters are re-seeded from the point
    farthest from its assigned centroid.
    """
    points = np.asarray(settings, dtype=float)
    if points.ndim != 2:
        raise ValidationError("settings must be a 2-d array")
    distinct = np.unique(points, axis=0)
    if len(distinct) < n_clusters:
        raise ValidationError(
            f"{len(distinct)} distinct settings vectors for {n_clusters} clusters"
        )

    rng = np.random.default_rng(seed)

    # k-means++ seeding
    centroids = [points[rng.integers(len(points))]]
    for _ in range(1, n_clusters):
        d2 = np.min(
            [np.sum((points - c) ** 2, axis=1) for c in centroids], axis=0
        )
        total = d2.sum()
        if total == 0:
            # all remaining mass on already-chosen centers; pick a new distinct point
            for p in distinct:
                if not any(np.array_equal(p, c) for c in centroids):
                    centroids.append(p)
                    break
            continue
        centroids.append(points[rng.choice(len(points), p=d2 / total)])
    centroids = np.array(centroids)

    for _ in range(300):
        dists = np.array(
            [np.sum((points - c) ** 2, axis=1) for c in centroids]
        )  # (K, n)
        labels = np.argmin(dists, axis=0)
        new_centroids = centroids.copy()
        for k in range(n_clusters):
            members = points[labels == k]
            if len(members) == 0:
                farthest = np.argmax(dists[labels, np.arange(len(points))])
                new_centroids[k] = points[farthest]
            else:
                new_centroids[k] = members.mean(axis=0)
        if np.allclose(new_centroids, centroids, atol=0, rtol=0):
            break
        centroids = new_centroids

    dists = np.array([np.sum((points - c) ** 2, axis=1) for c in centroids])
    labels = np.argmin(dists, axis=0)
    return labels, centroids


def nearest_centroid(centroids: np.ndarray, settings: np.ndarray) -> np.ndarray:
    """Label each settings row with its nearest centroid index."""
    points = np.atleast_2d(np.asarray(settings, dtype=float))
    dists = np.array([np.sum((points - c) ** 2, axis=1) for c in centroids])
    return np.argmin(dists, axis=0)


def assign(mm: MultiModel, x: np.ndarray) -> tuple[int, float]:
    """Index of the minimum-distance model and that distance; ties -> lowest index."""
    dists = [mahalanobis(m, x) for m in mm.models]
    k = int(np.argmin(dists))
    return k, dists[k]


def assign_rows(mm: MultiModel, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized assign over a (n, D) matrix: (labels, min distances)."""
    dists = np.array([mahalanobis_rows(m, rows) for m in mm.models])
    labels = np.argmin(dists, axis=0)
    return labels, dists[labels, np.arange(rows.shape[0])]


def update_winner(mm: MultiModel, x: np.ndarray, cfg: TrainConfig) -> MultiModel:
    """Update only the minimum-distance model; all others stay untouched."""
    k, _ = assign(mm, x)
    models = list(mm.models)
    models[k] = update(models[k], x, cfg)
    return MultiModel(models=models, centroids=mm.centroids)


def train_multi_until_converged(
    mm: MultiModel, healthy: np.ndarray, cfg: TrainConfig
) -> tuple[MultiModel, list[float]]:
    """Epoch training with min-distance routing; same stopping rule as the
    single-model trainer, on the mean assigned distance."""
    healthy = np.asarray(healthy, dtype=float)
    if healthy.ndim != 2 or len(healthy) == 0:
        raise ValidationError("healthy rows must be a non-empty 2-d array")

    trace = [float(np.mean(assign_rows(mm, healthy)[1]))]
    for _ in range(cfg.max_epochs):
        for row in healthy:
            mm = update_winner(mm, row, cfg)
        mean_dist = float(np.mean(assign_rows(mm, healthy)[1]))
        prev = trace[-1]
        trace.append(mean_dist)
        if prev == 0.0:
            if mean_dist == 0.0:
                break
        elif abs(mean_dist - prev) / prev < cfg.rel_tol:
            break
    return mm, trace


# ---------------------------------------------------------------------------
# serialization

def multimodel_to_dict(mm: MultiModel) -> dict:
    return {
        "version": MODEL_FORMAT_VERSION,
        "K": mm.n_regimes,
        "centroids": mm.centroids.tolist(),
        "models": [model_to_dict(m) for m in mm.models],
    }


def multimodel_from_dict(doc: dict) -> MultiModel:
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ValidationError(
            f"unsupported model format version {doc.get('version')!r}"
        )
    try:
        mm = MultiModel(
            models=[model_from_dict(m) for m in doc["models"]],
            centroids=np.array(doc["centroids"], dtype=float),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed multi-model document: {exc}")
    if doc.get("K") != mm.n_regimes:
        raise ValidationError("model count does not match K")
    mm.validate()
    return mm


def save_multimodel(mm: MultiModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(multimodel_to_dict(mm)))


def load_multimodel(path: str | Path) -> MultiModel:
    return multimodel_from_dict(json.loads(Path(path).read_text()))
