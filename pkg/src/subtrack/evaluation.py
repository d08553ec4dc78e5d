"""Performance metrics and the end-to-end benchmark pipeline.

RMSE and the asymmetric exponential score penalize late failure detection
(overestimated RUL) more than early detection. The pipeline wires dataset
ingestion, subspace tracking, health-index generation and curve-matching RUL
estimation into a single reproducible run.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, replace

import numpy as np

from . import dataset, health, multiscale, rul, subspace
from .config import RunConfig
from .dataset import Normalizer, TrajectorySet
from .errors import NoMatchError, PrognosticsError, ValidationError
from .health import DistanceScaler, HiCurve, HiRegressor
from .multiscale import MultiModel
from .rul import MatchConfig, RulEstimate
from .subspace import SubspaceModel, TrainConfig

GAMMA_EARLY = 1.0 / 13.0  # estimate below truth (early maintenance)
GAMMA_LATE = 1.0 / 10.0  # estimate above truth (late maintenance)

REPORT_FORMAT_VERSION = 1


def rmse(errors) -> float:
    """Root mean squared RUL error over the fleet."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValidationError("rmse of an empty error list")
    return float(np.sqrt(np.mean(errors**2)))


def score(errors) -> float:
    """Sum of exp(gamma * |e|) - 1 with the larger gamma for late estimates."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValidationError("score of an empty error list")
    gamma = np.where(errors < 0, GAMMA_EARLY, GAMMA_LATE)
    return float(np.sum(np.exp(gamma * np.abs(errors)) - 1.0))


def piecewise_rul(failure_time: float, onset: float, t: float) -> float:
    """Capped linear RUL target: constant before degradation onset, then
    decaying to zero at failure."""
    if not 0 <= onset < failure_time:
        raise ValidationError("need 0 <= onset < failure_time")
    if not 0 <= t <= failure_time:
        raise ValidationError("t outside [0, failure_time]")
    return float(min(failure_time - t, failure_time - onset))


# ---------------------------------------------------------------------------
# pipeline

@dataclass(frozen=True)
class TrainedPipeline:
    config: RunConfig
    normalizer: Normalizer
    model: SubspaceModel | MultiModel
    scaler: DistanceScaler
    regressor: HiRegressor | None
    train_curves: list[HiCurve]
    error_trace: list[float]


def _feature_rows(traj: dataset.Trajectory, track_settings: bool) -> np.ndarray:
    return traj.features if track_settings else traj.sensors


def _regime_row_labels(
    tset: TrajectorySet, centroids: np.ndarray | None
) -> list[np.ndarray] | None:
    if centroids is None:
        return None
    return [multiscale.nearest_centroid(centroids, t.settings) for t in tset]


def train_pipeline(train_set: TrajectorySet, cfg: RunConfig) -> TrainedPipeline:
    """Fit the full training stage: regimes, normalizer, tracker, scaler and
    (in sst-lr mode) the health-index regressor."""
    train_cfg = TrainConfig(
        alpha=cfg.alpha, eta=cfg.eta, max_epochs=cfg.max_epochs, rel_tol=cfg.rel_tol
    )

    centroids = None
    if cfg.n_regimes > 1:
        all_settings = np.vstack([t.settings for t in train_set])
        _, centroids = multiscale.cluster_regimes(
            all_settings, cfg.n_regimes, seed=cfg.seed
        )
    labels = _regime_row_labels(train_set, centroids)

    norm = dataset.fit_normalizer(train_set, regimes=labels)
    normed = dataset.apply_normalizer(norm, train_set, regimes=labels)

    unit_rows = [_feature_rows(t, cfg.track_settings) for t in normed]
    healthy = np.vstack([r[: cfg.healthy_cycles] for r in unit_rows])

    if cfg.n_regimes == 1:
        model = subspace.init_subspace(healthy, cfg.subspace_dim, cfg.delta)
        model, trace = subspace.train_until_converged(model, healthy, train_cfg)
    else:
        healthy_labels = np.concatenate(
            [lab[: cfg.healthy_cycles] for lab in labels]
        )
        members = []
        for k in range(cfg.n_regimes):
            rows_k = healthy[healthy_labels == k]
            if len(rows_k) <= cfg.subspace_dim:
                raise ValidationError(
                    f"regime {k}: {len(rows_k)} healthy rows cannot initialize "
                    f"a {cfg.subspace_dim}-dimensional subspace"
                )
            members.append(
                subspace.init_subspace(rows_k, cfg.subspace_dim, cfg.delta)
            )
        model = MultiModel(models=members, centroids=centroids)
        model, trace = multiscale.train_multi_until_converged(
            model, healthy, train_cfg
        )

    raw_series = []
    projections = []
    row_regimes = []
    for rows in unit_rows:
        dists, proj, reg = health.analyze_rows(model, rows)
        raw_series.append(dists)
        projections.append(proj)
        row_regimes.append(reg)

    scaler = health.fit_scaler(raw_series, cfg.healthy_cycles, cfg.smoothing)
    curves = [
        health.build_curve(t.unit_id, raw, scaler, cfg.smoothing)
        for t, raw in zip(train_set, raw_series)
    ]

    regressor = None
    if cfg.mode == "sst-lr":
        regressor = health.fit_hi_regression(
            np.vstack(projections),
            np.concatenate([c.sigma for c in curves]),
            labels=np.concatenate(row_regimes) if cfg.n_regimes > 1 else None,
        )

    return TrainedPipeline(
        config=cfg,
        normalizer=norm,
        model=model,
        scaler=scaler,
        regressor=regressor,
        train_curves=curves,
        error_trace=trace,
    )


def infer_curves(pipe: TrainedPipeline, tset: TrajectorySet) -> list[HiCurve]:
    """Health-index curves for a fleet under the trained pipeline.

    sst mode scales the assigned distances; sst-lr mode predicts the index
    from the subspace projections instead.
    """
    cfg = pipe.config
    centroids = pipe.model.centroids if isinstance(pipe.model, MultiModel) else None
    labels = _regime_row_labels(tset, centroids)
    normed = dataset.apply_normalizer(pipe.normalizer, tset, regimes=labels)

    curves = []
    for traj in normed:
        rows = _feature_rows(traj, cfg.track_settings)
        dists, proj, reg = health.analyze_rows(pipe.model, rows)
        if cfg.mode == "sst-lr":
            if pipe.regressor is None:
                raise ValidationError("sst-lr mode requires a fitted regressor")
            sigma = health.predict_hi(
                pipe.regressor, proj, labels=reg if cfg.n_regimes > 1 else None
            )
            scaled = health.scale(pipe.scaler, health.smooth(dists, cfg.smoothing))
            curves.append(
                HiCurve(
                    unit_id=traj.unit_id,
                    sigma=sigma,
                    raw_dist=dists,
                    scaled_dist=scaled,
                )
            )
        else:
            curves.append(
                health.build_curve(traj.unit_id, dists, pipe.scaler, cfg.smoothing)
            )
    return curves


def estimate_fleet(
    pipe: TrainedPipeline,
    test_curves: list[HiCurve],
    skip_unmatched: bool = False,
) -> list[RulEstimate | None]:
    """Match each (smoothed) test curve against the smoothed training library.

    With skip_unmatched, a curve with no valid (unit, lag) candidate yields
    None instead of raising; benchmark runs keep the hard failure.
    """
    cfg = pipe.config
    match_cfg = MatchConfig(tau1=cfg.tau1, tau2=cfg.tau2, beta=cfg.beta)
    library = [
        replace(c, sigma=health.smooth(c.sigma, cfg.smoothing))
        for c in pipe.train_curves
    ]
    estimates = []
    for curve in test_curves:
        smoothed = replace(curve, sigma=health.smooth(curve.sigma, cfg.smoothing))
        try:
            estimates.append(rul.estimate_rul(smoothed, library, match_cfg))
        except NoMatchError:
            if not skip_unmatched:
                raise
            estimates.append(None)
    return estimates


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class RulReport:
    rows: list[dict]  # unit_id, estimate, truth, error
    rmse: float
    score: float
    config: dict
    wall_time: float

    def to_json(self) -> str:
        # wall_time is deliberately left out so identical runs serialize
        # byte-identically
        return json.dumps(
            {
                "version": REPORT_FORMAT_VERSION,
                "config": self.config,
                "n_units": len(self.rows),
                "rmse": self.rmse,
                "score": self.score,
                "rows": self.rows,
            },
            indent=2,
            sort_keys=True,
        )

    def to_text(self) -> str:
        lines = [
            f"{'unit':>6} {'estimate':>10} {'truth':>8} {'error':>8}",
        ]
        for r in self.rows:
            lines.append(
                f"{r['unit_id']:>6} {r['estimate']:>10.2f} "
                f"{r['truth']:>8} {r['error']:>8.2f}"
            )
        lines.append("")
        lines.append(f"units: {len(self.rows)}")
        lines.append(f"rmse:  {self.rmse:.4f}")
        lines.append(f"score: {self.score:.4f}")
        lines.append(f"wall time: {self.wall_time:.2f} s")
        return "\n".join(lines)


def build_report(
    estimates: list[RulEstimate],
    truths: list[int],
    cfg: RunConfig,
    wall_time: float,
) -> RulReport:
    if len(estimates) != len(truths):
        raise ValidationError("one truth value per estimate required")
    rows = []
    errors = []
    for est, truth in zip(estimates, truths):
        err = est.estimate - truth
        errors.append(err)
        rows.append(
            {
                "unit_id": est.unit_id,
                "estimate": est.estimate,
                "truth": truth,
                "error": err,
            }
        )
    return RulReport(
        rows=rows,
        rmse=rmse(errors),
        score=score(errors),
        config=cfg.to_dict(),
        wall_time=wall_time,
    )


@contextmanager
def _stage(name: str):
    """Tag pipeline errors with the stage they came from."""
    try:
        yield
    except PrognosticsError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc


def run_pipeline(
    train_set: TrajectorySet,
    test_set: TrajectorySet,
    truths: list[int],
    cfg: RunConfig,
) -> tuple[RulReport, TrainedPipeline, list[HiCurve]]:
    """Full in-memory benchmark: train, infer, match, evaluate."""
    start = time.perf_counter()
    with _stage("train"):
        pipe = train_pipeline(train_set, cfg)
    with _stage("infer"):
        test_curves = infer_curves(pipe, test_set)
    with _stage("match"):
        estimates = estimate_fleet(pipe, test_curves)
    with _stage("evaluate"):
        report = build_report(estimates, truths, cfg, time.perf_counter() - start)
    return report, pipe, test_curves


def run_benchmark(
    train_path, test_path, rul_path, cfg: RunConfig
) -> tuple[RulReport, TrainedPipeline, list[HiCurve]]:
    """File-based benchmark entry point for CMAPSS-format datasets."""
    with _stage("load"):
        train_set = dataset.load_cmapss(train_path)
        test_set = dataset.load_cmapss(test_path)
        truths = dataset.load_rul_targets(rul_path, len(test_set))
    return run_pipeline(train_set, test_set, truths, cfg)
