"""CMAPSS-format ingestion, feature normalization and synthetic fleet generation.

A data file is whitespace-separated text, one row per cycle:

    unit cycle setting1 setting2 setting3 sensor1 ... sensor21

Ground-truth files carry one integer RUL per test unit, in unit order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError, ValidationError

N_SETTINGS = 3
N_SENSORS = 21
N_COLUMNS = 2 + N_SETTINGS + N_SENSORS

# features with sample std below this are treated as constant and masked
CONSTANT_STD = 1e-12


@dataclass(frozen=True)
class Trajectory:
    """One unit's time-ordered operational settings and sensor readings.

    Cycle indices are implicit: row i is cycle i+1.
    """

    unit_id: int
    settings: np.ndarray  # (L, n_settings)
    sensors: np.ndarray  # (L, n_sensors)

    def __post_init__(self):
        if self.settings.ndim != 2 or self.sensors.ndim != 2:
            raise ValidationError("settings and sensors must be 2-d arrays")
        if len(self.settings) != len(self.sensors):
            raise ValidationError(
                f"unit {self.unit_id}: settings/sensors length mismatch"
            )
        if len(self.settings) == 0:
            raise ValidationError(f"unit {self.unit_id}: empty trajectory")

    def __len__(self) -> int:
        return len(self.sensors)

    @property
    def cycles(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    @property
    def features(self) -> np.ndarray:
        """Full feature matrix, settings columns first. Shape (L, D)."""
        return np.hstack([self.settings, self.sensors])


@dataclass(frozen=True)
class TrajectorySet:
    """A fleet of trajectories; `kind` is 'train' (run-to-failure) or 'test'."""

    trajectories: list[Trajectory]
    kind: str = "train"

    def __post_init__(self):
        if not self.trajectories:
            raise ValidationError("empty trajectory set")
        ids = [t.unit_id for t in self.trajectories]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate unit ids in trajectory set")

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    @property
    def unit_ids(self) -> list[int]:
        return [t.unit_id for t in self.trajectories]


def load_cmapss(path: str | Path) -> TrajectorySet:
    """Parse a 26-column CMAPSS-format text file into a TrajectorySet.

    Raises DataFormatError with the offending line number on malformed rows,
    ValidationError when a unit's cycle indices are not 1, 2, 3, ...
    """
    path = Path(path)
    rows_by_unit: dict[int, list[tuple[int, np.ndarray]]] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != N_COLUMNS:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {N_COLUMNS} fields, got {len(parts)}"
                )
            try:
                values = np.array([float(p) for p in parts])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: non-numeric field ({exc})")
            unit = int(values[0])
            cycle = int(values[1])
            rows_by_unit.setdefault(unit, []).append((cycle, values[2:]))

    if not rows_by_unit:
        raise DataFormatError(f"{path}: no data rows")

    trajectories = []
    kind = "train" if "train" in path.name.lower() else (
        "test" if "test" in path.name.lower() else "train"
    )
    for unit in sorted(rows_by_unit):
        rows = sorted(rows_by_unit[unit], key=lambda r: r[0])
        cycles = [c for c, _ in rows]
        if cycles != list(range(1, len(cycles) + 1)):
            raise ValidationError(
                f"{path}: unit {unit} has non-contiguous cycle indices"
            )
        data = np.array([v for _, v in rows])
        trajectories.append(
            Trajectory(
                unit_id=unit,
                settings=data[:, :N_SETTINGS],
                sensors=data[:, N_SETTINGS:],
            )
        )
    return TrajectorySet(trajectories, kind=kind)


def save_cmapss(tset: TrajectorySet, path: str | Path) -> None:
    """Write a TrajectorySet back to 26-column text; values round-trip exactly."""
    path = Path(path)
    with open(path, "w") as fh:
        for traj in tset:
            feats = traj.features
            for i in range(len(traj)):
                vals = " ".join(repr(float(v)) for v in feats[i])
                fh.write(f"{traj.unit_id} {i + 1} {vals}\n")


def load_rul_targets(path: str | Path, n_units: int) -> list[int]:
    """Read one integer RUL per line; must match the test fleet size exactly."""
    path = Path(path)
    targets = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip()
            if not token:
                continue
            try:
                targets.append(int(float(token)))
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-numeric RUL value")
    if len(targets) != n_units:
        raise ValidationError(
            f"{path}: {len(targets)} RUL lines for {n_units} test units"
        )
    return targets


# ---------------------------------------------------------------------------
# normalization

@dataclass(frozen=True)
class Normalizer:
    """Per-feature z-score statistics, optionally one table per regime.

    Constant features (std below CONSTANT_STD) are masked: their output is 0,
    keeping the column count and indices aligned with the file format.
    """

    mean: np.ndarray  # (R, F)
    std: np.ndarray  # (R, F); 1.0 where masked
    mask: np.ndarray  # (R, F) bool; True = constant feature

    @property
    def n_regimes(self) -> int:
        return self.mean.shape[0]

    @property
    def n_features(self) -> int:
        return self.mean.shape[1]

    def transform_rows(self, rows: np.ndarray, labels: np.ndarray | None = None) -> np.ndarray:
        if rows.shape[1] != self.n_features:
            raise ValidationError(
                f"normalizer fitted on {self.n_features} features, got {rows.shape[1]}"
            )
        if self.n_regimes > 1 and labels is None:
            raise ValidationError("regime-conditional normalizer requires labels")
        if labels is None:
            labels = np.zeros(len(rows), dtype=int)
        out = (rows - self.mean[labels]) / self.std[labels]
        out[self.mask[labels]] = 0.0
        return out


def _row_labels(tset: TrajectorySet, regimes) -> list[np.ndarray]:
    if regimes is None:
        return [np.zeros(len(t), dtype=int) for t in tset]
    if len(regimes) != len(tset.trajectories):
        raise ValidationError("one label array per trajectory required")
    return [np.asarray(r, dtype=int) for r in regimes]


def fit_normalizer(tset: TrajectorySet, regimes: list[np.ndarray] | None = None) -> Normalizer:
    """Fit z-score statistics over all rows, per regime when labels are given.

    `regimes` is a list aligned with tset.trajectories; each entry holds one
    integer regime label per cycle.
    """
    labels = _row_labels(tset, regimes)
    rows = np.vstack([t.features for t in tset])
    flat = np.concatenate(labels)
    n_regimes = int(flat.max()) + 1 if regimes is not None else 1
    n_features = rows.shape[1]

    mean = np.zeros((n_regimes, n_features))
    std = np.ones((n_regimes, n_features))
    mask = np.zeros((n_regimes, n_features), dtype=bool)
    for r in range(n_regimes):
        sub = rows[flat == r]
        if len(sub) == 0:
            mask[r] = True
            continue
        mu = sub.mean(axis=0)
        sd = sub.std(axis=0)
        constant = sd < CONSTANT_STD
        mean[r] = mu
        std[r] = np.where(constant, 1.0, sd)
        mask[r] = constant
    return Normalizer(mean=mean, std=std, mask=mask)


def apply_normalizer(
    norm: Normalizer,
    tset: TrajectorySet,
    regimes: list[np.ndarray] | None = None,
) -> TrajectorySet:
    """Return a new TrajectorySet with the stored affine transform applied."""
    labels = _row_labels(tset, regimes)
    out = []
    for traj, lab in zip(tset, labels):
        feats = norm.transform_rows(traj.features, lab)
        n_set = traj.settings.shape[1]
        out.append(
            Trajectory(
                unit_id=traj.unit_id,
                settings=feats[:, :n_set],
                sensors=feats[:, n_set:],
            )
        )
    return TrajectorySet(out, kind=tset.kind)


# ---------------------------------------------------------------------------
# synthetic fleets

@dataclass(frozen=True)
class SynthConfig:
    """Generator for fleets whose healthy rows lie on a known affine subspace.

    Healthy rows are c + B z + noise with z drawn from the per-axis spreads;
    after the onset cycle an off-subspace drift component grows linearly at
    drift_rate per cycle, which is exactly the quantity the residual term of
    the subspace distance should pick up.
    """

    n_units: int = 50
    n_test_units: int | None = None
    n_features: int = 24  # settings + sensors, CMAPSS layout when 24
    subspace_dim: int = 3
    n_regimes: int = 1
    noise_std: float = 0.01
    drift_onset_fraction: float = 0.5
    drift_rate: float = 0.02
    seed: int = 0
    min_cycles: int = 150
    max_cycles: int = 300
    min_test_cycles: int = 30

    def validate(self) -> None:
        if self.subspace_dim >= self.n_features - N_SETTINGS:
            raise ValidationError("subspace_dim must be < number of sensor features")
        if self.n_regimes < 1:
            raise ValidationError("n_regimes must be >= 1")
        if self.noise_std < 0:
            raise ValidationError("noise_std must be >= 0")
        if not 0.0 <= self.drift_onset_fraction <= 1.0:
            raise ValidationError("drift_onset_fraction must be in [0, 1]")
        if self.n_units < 1:
            raise ValidationError("n_units must be >= 1")
        if self.min_cycles > self.max_cycles:
            raise ValidationError("min_cycles must be <= max_cycles")
        if self.n_features <= N_SETTINGS:
            raise ValidationError(f"n_features must exceed {N_SETTINGS}")


@dataclass(frozen=True)
class RegimeGround:
    """True generating parameters of one regime (for oracle tests)."""

    settings: np.ndarray  # (n_settings,)
    center: np.ndarray  # (n_sensors,)
    basis: np.ndarray  # (n_sensors, d), orthonormal
    spreads: np.ndarray  # (d,)
    drift_dir: np.ndarray  # (n_sensors,), unit norm, orthogonal to basis


def _random_orthonormal(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((n, d)))
    return q


def _make_regimes(cfg: SynthConfig, rng: np.random.Generator) -> list[RegimeGround]:
    n_sensors = cfg.n_features - N_SETTINGS
    regimes = []
    for k in range(cfg.n_regimes):
        settings = np.zeros(N_SETTINGS) if cfg.n_regimes == 1 else rng.uniform(
            0.0, 100.0, N_SETTINGS
        )
        center = rng.uniform(-2.0, 2.0, n_sensors)
        basis = _random_orthonormal(rng, n_sensors, cfg.subspace_dim)
        spreads = rng.uniform(0.5, 2.0, cfg.subspace_dim)
        raw = rng.standard_normal(n_sensors)
        drift = raw - basis @ (basis.T @ raw)
        drift /= np.linalg.norm(drift)
        regimes.append(RegimeGround(settings, center, basis, spreads, drift))
    return regimes


def _sample_unit(
    cfg: SynthConfig,
    rng: np.random.Generator,
    regimes: list[RegimeGround],
    unit_id: int,
    length: int,
) -> Trajectory:
    onset = int(cfg.drift_onset_fraction * length)
    n_sensors = cfg.n_features - N_SETTINGS
    settings = np.empty((length, N_SETTINGS))
    sensors = np.empty((length, n_sensors))
    for i in range(length):
        t = i + 1
        k = int(rng.integers(cfg.n_regimes)) if cfg.n_regimes > 1 else 0
        reg = regimes[k]
        z = rng.standard_normal(cfg.subspace_dim) * np.sqrt(reg.spreads)
        eps = rng.standard_normal(n_sensors) * cfg.noise_std
        x = reg.center + reg.basis @ z + eps
        x = x + cfg.drift_rate * max(0, t - onset) * reg.drift_dir
        settings[i] = reg.settings
        sensors[i] = x
    return Trajectory(unit_id=unit_id, settings=settings, sensors=sensors)


def generate_synthetic(
    cfg: SynthConfig,
) -> tuple[TrajectorySet, TrajectorySet, list[int], list[RegimeGround]]:
    """Generate (train fleet, truncated test fleet, true RULs, ground truth).

    Deterministic for a fixed seed. Train units run to failure; test units are
    truncated uniformly at random before their failure cycle and the withheld
    tail length is recorded as the true RUL.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    regimes = _make_regimes(cfg, rng)

    train = []
    for u in range(1, cfg.n_units + 1):
        length = int(rng.integers(cfg.min_cycles, cfg.max_cycles + 1))
        train.append(_sample_unit(cfg, rng, regimes, u, length))

    n_test = cfg.n_test_units if cfg.n_test_units is not None else cfg.n_units
    test = []
    true_ruls = []
    for u in range(1, n_test + 1):
        length = int(rng.integers(cfg.min_cycles, cfg.max_cycles + 1))
        full = _sample_unit(cfg, rng, regimes, u, length)
        lo = min(cfg.min_test_cycles, length - 1)
        keep = int(rng.integers(lo, length))
        test.append(
            Trajectory(
                unit_id=u,
                settings=full.settings[:keep],
                sensors=full.sensors[:keep],
            )
        )
        true_ruls.append(length - keep)

    return (
        TrajectorySet(train, kind="train"),
        TrajectorySet(test, kind="test"),
        true_ruls,
        regimes,
    )
