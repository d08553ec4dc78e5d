import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subtrack.dataset import (
    N_SENSORS,
    N_SETTINGS,
    SynthConfig,
    Trajectory,
    TrajectorySet,
    apply_normalizer,
    fit_normalizer,
    generate_synthetic,
    load_cmapss,
    load_rul_targets,
    save_cmapss,
)
from subtrack.errors import DataFormatError, ValidationError
from subtrack.subspace import SubspaceModel, mahalanobis_rows


def write_rows(path, rows):
    path.write_text("".join(" ".join(str(v) for v in row) + "\n" for row in rows))


def make_row(unit, cycle, value=0.0):
    return [unit, cycle] + [value + i for i in range(24)]


class TestLoadCmapss:
    def test_single_unit_three_rows(self, tmp_path):
        f = tmp_path / "train_tiny.txt"
        write_rows(f, [make_row(1, 1), make_row(1, 2), make_row(1, 3)])
        tset = load_cmapss(f)
        assert len(tset) == 1
        assert len(tset.trajectories[0]) == 3
        assert tset.trajectories[0].settings.shape == (3, N_SETTINGS)
        assert tset.trajectories[0].sensors.shape == (3, N_SENSORS)

    def test_wrong_field_count_reports_line(self, tmp_path):
        f = tmp_path / "bad.txt"
        write_rows(f, [make_row(1, 1), make_row(1, 2)[:-1]])
        with pytest.raises(DataFormatError, match=":2:"):
            load_cmapss(f)

    def test_non_numeric_field(self, tmp_path):
        f = tmp_path / "bad.txt"
        row = make_row(1, 1)
        row[5] = "oops"
        write_rows(f, [row])
        with pytest.raises(DataFormatError, match=":1:"):
            load_cmapss(f)

    def test_non_contiguous_cycles_names_unit(self, tmp_path):
        f = tmp_path / "bad.txt"
        write_rows(f, [make_row(7, 1), make_row(7, 3)])
        with pytest.raises(ValidationError, match="unit 7"):
            load_cmapss(f)

    def test_round_trip_preserves_values(self, tmp_path):
        rng = np.random.default_rng(0)
        trajs = [
            Trajectory(
                unit_id=u,
                settings=rng.standard_normal((5, N_SETTINGS)),
                sensors=rng.standard_normal((5, N_SENSORS)) * 100,
            )
            for u in (1, 2)
        ]
        tset = TrajectorySet(trajs)
        f = tmp_path / "rt.txt"
        save_cmapss(tset, f)
        back = load_cmapss(f)
        for a, b in zip(tset, back):
            np.testing.assert_array_equal(a.settings, b.settings)
            np.testing.assert_array_equal(a.sensors, b.sensors)


class TestLoadRulTargets:
    def test_matching_count(self, tmp_path):
        f = tmp_path / "rul.txt"
        f.write_text("10\n20\n30\n")
        assert load_rul_targets(f, 3) == [10, 20, 30]

    def test_empty_file_zero_units(self, tmp_path):
        f = tmp_path / "rul.txt"
        f.write_text("")
        assert load_rul_targets(f, 0) == []

    def test_count_mismatch(self, tmp_path):
        f = tmp_path / "rul.txt"
        f.write_text("10\n20\n")
        with pytest.raises(ValidationError):
            load_rul_targets(f, 3)


def traj_from_features(unit_id, feats):
    feats = np.asarray(feats, dtype=float)
    return Trajectory(
        unit_id=unit_id, settings=feats[:, :N_SETTINGS], sensors=feats[:, N_SETTINGS:]
    )


class TestNormalizer:
    def test_constant_feature_masked_to_zero(self):
        rng = np.random.default_rng(1)
        feats = rng.standard_normal((40, 24))
        feats[:, 5] = 3.14
        tset = TrajectorySet([traj_from_features(1, feats)])
        norm = fit_normalizer(tset)
        out = apply_normalizer(norm, tset)
        assert np.all(out.trajectories[0].features[:, 5] == 0.0)

    def test_two_point_feature(self):
        feats = np.zeros((2, 24))
        feats[1, :] = 2.0
        tset = TrajectorySet([traj_from_features(1, feats)])
        norm = fit_normalizer(tset)
        out = apply_normalizer(norm, tset).trajectories[0].features
        np.testing.assert_allclose(out[0], -1.0)
        np.testing.assert_allclose(out[1], 1.0)

    def test_fit_set_becomes_standard(self):
        rng = np.random.default_rng(2)
        feats = rng.standard_normal((500, 24)) * rng.uniform(0.1, 10, 24) + 5
        tset = TrajectorySet([traj_from_features(1, feats)])
        norm = fit_normalizer(tset)
        out = apply_normalizer(norm, tset).trajectories[0].features
        np.testing.assert_allclose(out.mean(axis=0), 0.0, atol=1e-9)
        np.testing.assert_allclose(out.std(axis=0), 1.0, atol=1e-9)

    def test_identity_normalizer(self):
        rng = np.random.default_rng(3)
        feats = rng.standard_normal((10, 24))
        tset = TrajectorySet([traj_from_features(1, feats)])
        norm = fit_normalizer(tset)
        ident = type(norm)(
            mean=np.zeros_like(norm.mean),
            std=np.ones_like(norm.std),
            mask=np.zeros_like(norm.mask),
        )
        out = apply_normalizer(ident, tset).trajectories[0].features
        np.testing.assert_array_equal(out, feats)

    def test_per_regime_tables(self):
        rng = np.random.default_rng(4)
        feats = rng.standard_normal((60, 24))
        labels = [np.repeat(np.arange(6), 10)]
        tset = TrajectorySet([traj_from_features(1, feats)])
        norm = fit_normalizer(tset, regimes=labels)
        assert norm.n_regimes == 6
        out = apply_normalizer(norm, tset, regimes=labels).trajectories[0].features
        for r in range(6):
            seg = out[10 * r : 10 * (r + 1)]
            np.testing.assert_allclose(seg.mean(axis=0), 0.0, atol=1e-9)

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(5)
        tset = TrajectorySet([traj_from_features(1, rng.standard_normal((10, 24)))])
        norm = fit_normalizer(tset)
        with pytest.raises(ValidationError):
            norm.transform_rows(rng.standard_normal((10, 23)))


class TestGenerateSynthetic:
    def test_zero_noise_samples_lie_on_subspace(self):
        cfg = SynthConfig(
            n_units=3, noise_std=0.0, drift_rate=0.0, seed=1,
            min_cycles=40, max_cycles=60,
        )
        train, _, _, regimes = generate_synthetic(cfg)
        reg = regimes[0]
        for traj in train:
            diff = traj.sensors - reg.center
            residual = diff - (diff @ reg.basis) @ reg.basis.T
            assert np.max(np.sum(residual**2, axis=1)) <= 1e-18

    def test_determinism(self):
        cfg = SynthConfig(n_units=4, seed=7, min_cycles=40, max_cycles=60)
        a_train, a_test, a_rul, _ = generate_synthetic(cfg)
        b_train, b_test, b_rul, _ = generate_synthetic(cfg)
        assert a_rul == b_rul
        for x, y in zip(a_train, b_train):
            np.testing.assert_array_equal(x.sensors, y.sensors)
        for x, y in zip(a_test, b_test):
            np.testing.assert_array_equal(x.sensors, y.sensors)

    def test_drift_energy_at_final_cycle(self):
        cfg = SynthConfig(
            n_units=1, noise_std=0.0, drift_rate=0.05,
            drift_onset_fraction=0.5, seed=2, min_cycles=200, max_cycles=200,
        )
        train, _, _, regimes = generate_synthetic(cfg)
        traj = train.trajectories[0]
        reg = regimes[0]
        diff = traj.sensors[-1] - reg.center
        residual = diff - reg.basis @ (reg.basis.T @ diff)
        assert residual @ residual == pytest.approx((100 * 0.05) ** 2, rel=1e-10)

    def test_invalid_config(self):
        with pytest.raises(ValidationError):
            generate_synthetic(SynthConfig(noise_std=-1.0))
        with pytest.raises(ValidationError):
            generate_synthetic(SynthConfig(subspace_dim=30))

    def test_mean_distance_matches_analytic_expectation(self):
        # drift-free fleet scored by the true generating model: the mean
        # distance has a closed form from the chi-square terms
        cfg = SynthConfig(
            n_units=40, noise_std=0.05, drift_rate=0.0, seed=3,
            min_cycles=250, max_cycles=300,
        )
        train, _, _, regimes = generate_synthetic(cfg)
        reg = regimes[0]
        delta = 0.01
        model = SubspaceModel(
            basis=reg.basis, center=reg.center, spreads=reg.spreads, delta=delta
        )
        rows = np.vstack([t.sensors for t in train])
        assert len(rows) >= 10_000
        dists = mahalanobis_rows(model, rows)

        s2 = cfg.noise_std**2
        n_sensors = cfg.n_features - N_SETTINGS
        expected = delta * np.sum((reg.spreads + s2) / reg.spreads) + (
            n_sensors - cfg.subspace_dim
        ) * s2
        stderr = dists.std() / np.sqrt(len(dists))
        assert abs(dists.mean() - expected) <= 3 * stderr


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), factor=st.floats(0.1, 10.0))
def test_normalizer_round_trip_property(seed, factor):
    rng = np.random.default_rng(seed)
    feats = rng.standard_normal((50, 24)) * factor
    tset = TrajectorySet([traj_from_features(1, feats)])
    norm = fit_normalizer(tset)
    out = apply_normalizer(norm, tset).trajectories[0].features
    unmasked = ~norm.mask[0]
    np.testing.assert_allclose(out[:, unmasked].mean(axis=0), 0.0, atol=1e-9)
    np.testing.assert_allclose(out[:, unmasked].std(axis=0), 1.0, atol=1e-9)
