import numpy as np
import pytest

from crbm import (
    PairedModel,
    TrainConfig,
    coreg_penalty,
    hidden_probs,
    load_pair,
    normalize,
    read_config,
    save_pair,
    sparsify,
    sparsify_targets,
    synth_paired,
    train_pair,
    train_single,
    write_config,
)
from crbm.coreg import pair_to_bytes
from crbm.errors import AlignmentError, BatchError, DimensionError, FormatError
from crbm.rbm import Rbm

from oracles import fd_gradient, rel_err


class TestSparsify:
    def test_profile_mean_is_exact(self):
        for b, mu in [(4, 0.25), (7, 0.1), (32, 0.125), (3, 0.9)]:
            profile = sparsify_targets(b, mu)
            assert abs(profile.mean() - mu) < 1e-12
            assert np.all(np.diff(profile) <= 0)  # decreasing with rank

    def test_fixed_point(self):
        profile = sparsify_targets(4, 0.25)
        z = np.tile(profile[:, None], (1, 3))
        out = sparsify(z, 0.25)
        assert np.abs(out - z).max() < 1e-12

    def test_rank_assignment_with_tie(self):
        profile = sparsify_targets(4, 0.25)
        col = np.array([0.9, 0.1, 0.5, 0.5])
        out = sparsify(col[:, None], 0.25)[:, 0]
        # 0.9 -> rank 0; the 0.5 tie resolves to the lower row first; 0.1 last
        assert out[0] == profile[0]
        assert out[2] == profile[1]
        assert out[3] == profile[2]
        assert out[1] == profile[3]
        assert abs(out.mean() - 0.25) < 1e-12

    def test_constant_column_uses_row_order(self):
        profile = sparsify_targets(3, 0.2)
        out = sparsify(np.full((3, 2), 0.7), 0.2)
        assert np.allclose(out[:, 0], profile)
        assert np.allclose(out[:, 1], profile)

    def test_column_means_and_rank_preservation(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            b = int(rng.integers(2, 40))
            k = int(rng.integers(1, 6))
            mu = float(rng.uniform(0.05, 0.95))
            z = rng.uniform(size=(b, k))
            out = sparsify(z, mu)
            assert np.abs(out.mean(axis=0) - mu).max() < 1e-10
            for col in range(k):
                order = np.argsort(-z[:, col], kind="stable")
                ranked = out[order, col]
                assert np.all(np.diff(ranked) <= 1e-15)

    def test_single_row_rejected(self):
        with pytest.raises(BatchError):
            sparsify(np.array([[0.5, 0.5]]), 0.25)


class TestCoregPenalty:
    def test_zero_gradient_at_matching_probs(self):
        rng = np.random.default_rng(1)
        z = rng.uniform(0.05, 0.95, size=(4, 3))
        loss, grad = coreg_penalty(z, z)
        assert np.abs(grad).max() < 1e-15
        entropy = -(z * np.log(z) + (1 - z) * np.log1p(-z)).sum() / 4
        assert abs(loss - entropy) < 1e-12

    def test_half_probs_single_unit_gives_log_two(self):
        targets = np.random.default_rng(2).uniform(size=(5, 1))
        loss, _ = coreg_penalty(np.full((5, 1), 0.5), targets)
        assert abs(loss - np.log(2.0)) < 1e-12

    def test_half_probs_scale_with_unit_count(self):
        targets = np.random.default_rng(3).uniform(size=(4, 3))
        loss, _ = coreg_penalty(np.full((4, 3), 0.5), targets)
        assert abs(loss - 3 * np.log(2.0)) < 1e-12

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            b, k = 3, 2
            pre = rng.standard_normal((b, k))
            targets = rng.uniform(size=(b, k))

            def loss_of(flat):
                z = 1.0 / (1.0 + np.exp(-flat.reshape(b, k)))
                return coreg_penalty(z, targets)[0]

            z0 = 1.0 / (1.0 + np.exp(-pre))
            _, got = coreg_penalty(z0, targets)
            fd = fd_gradient(loss_of, pre.ravel()).reshape(b, k)
            assert rel_err(got, fd) < 1e-6

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            coreg_penalty(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_unit_pairing_is_columnwise(self):
        # Shuffling target unit j != k must not change unit k's gradient.
        rng = np.random.default_rng(5)
        z = rng.uniform(size=(6, 4))
        t = rng.uniform(size=(6, 4))
        _, base = coreg_penalty(z, t)
        permuted = t.copy()
        permuted[:, 1] = t[rng.permutation(6), 1]
        _, moved = coreg_penalty(z, permuted)
        assert np.array_equal(base[:, [0, 2, 3]], moved[:, [0, 2, 3]])


class TestTrainConfig:
    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)
        with pytest.raises(ValueError):
            TrainConfig(minibatch_size=1)
        with pytest.raises(ValueError):
            TrainConfig(sparsity_target=1.0)
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(lambda_subject=-0.1)

    def test_default_sparsity_follows_unit_count(self):
        assert TrainConfig(k_units=4).resolved_sparsity_target == 0.25
        assert TrainConfig(k_units=8).resolved_sparsity_target == 0.125
        assert TrainConfig(k_units=1).resolved_sparsity_target == 0.5

    def test_config_file_round_trip(self, tmp_path):
        cfg = TrainConfig(k_units=6, lambda_subject=0.7, lambda_scene=0.2,
                          sparsity_target=0.15, learning_rate=0.01, cd_steps=2,
                          minibatch_size=8, epochs=33, seed=99)
        path = tmp_path / "train.cfg"
        write_config(cfg, path)
        assert read_config(path) == cfg

    def test_config_file_errors(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("nonsense=1\n")
        with pytest.raises(FormatError):
            read_config(bad)
        bad.write_text("epochs=abc\n")
        with pytest.raises(FormatError):
            read_config(bad)
        bad.write_text("epochs\n")
        with pytest.raises(FormatError):
            read_config(bad)

    def test_config_file_defaults_and_comments(self, tmp_path):
        path = tmp_path / "partial.cfg"
        path.write_text("# only override two knobs\nk_units=3\nepochs=7\n")
        cfg = read_config(path)
        assert cfg.k_units == 3
        assert cfg.epochs == 7
        assert cfg.learning_rate == 0.05


def quick_data(t=48, k=3, seed=0):
    subject, scene, _ = synth_paired(t, k, 0.05, seed=seed, dim_subject=12, dim_scene=7)
    return normalize(subject), normalize(scene)


class TestTrainPair:
    def test_lambda_zero_factorizes(self):
        xs, xp = quick_data()
        cfg = TrainConfig(k_units=3, lambda_subject=0.0, lambda_scene=0.0,
                          epochs=8, minibatch_size=16, seed=5)
        pair = train_pair(xs, xp, cfg)
        alone_s = train_single(xs, cfg, role="subject")
        alone_p = train_single(xp, cfg, role="scene")
        assert pair.rbm_subject.weights.tobytes() == alone_s.weights.tobytes()
        assert pair.rbm_subject.hidden_bias.tobytes() == alone_s.hidden_bias.tobytes()
        assert pair.rbm_subject.visible_bias.tobytes() == alone_s.visible_bias.tobytes()
        assert pair.rbm_scene.weights.tobytes() == alone_p.weights.tobytes()

    def test_bitwise_deterministic(self):
        xs, xp = quick_data()
        cfg = TrainConfig(k_units=3, epochs=6, minibatch_size=16, seed=11)
        a = train_pair(xs, xp, cfg)
        b = train_pair(xs, xp, cfg)
        assert pair_to_bytes(a) == pair_to_bytes(b)

    def test_coupling_changes_the_outcome(self):
        xs, xp = quick_data()
        base = dict(k_units=3, epochs=6, minibatch_size=16, seed=11)
        coupled = train_pair(xs, xp, TrainConfig(lambda_subject=0.5, lambda_scene=0.5, **base))
        free = train_pair(xs, xp, TrainConfig(lambda_subject=0.0, lambda_scene=0.0, **base))
        assert coupled.rbm_subject.weights.tobytes() != free.rbm_subject.weights.tobytes()

    def test_alignment_errors(self):
        xs, xp = quick_data()
        short = normalize(synth_paired(40, 3, 0.05, seed=0, dim_subject=12, dim_scene=7)[1])
        cfg = TrainConfig(k_units=3, epochs=1, minibatch_size=16)
        with pytest.raises(AlignmentError):
            train_pair(xs, short, cfg)
        from crbm import FeatureMatrix
        resampled = FeatureMatrix(data=xp.data, fps=2.0, modality="scene")
        with pytest.raises(AlignmentError):
            train_pair(xs, resampled, cfg)

    def test_epochs_zero_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)

    def test_trailing_single_frame_is_folded(self):
        # 33 frames with minibatch 16 leaves a lone frame; training must cope.
        subject, scene, _ = synth_paired(33, 3, 0.05, seed=2, dim_subject=10, dim_scene=6)
        cfg = TrainConfig(k_units=3, epochs=2, minibatch_size=16, seed=0)
        model = train_pair(normalize(subject), normalize(scene), cfg)
        assert model.k_units == 3


class TestPairCheckpoint:
    def test_round_trip(self, tmp_path):
        xs, xp = quick_data()
        cfg = TrainConfig(k_units=3, epochs=2, minibatch_size=16, seed=1)
        model = train_pair(xs, xp, cfg)
        path = tmp_path / "pair.bin"
        save_pair(model, path)
        back = load_pair(path)
        assert pair_to_bytes(back) == pair_to_bytes(model)

    def test_header_k_must_match_blocks(self, tmp_path):
        xs, xp = quick_data()
        cfg = TrainConfig(k_units=3, epochs=1, minibatch_size=16, seed=1)
        model = train_pair(xs, xp, cfg)
        raw = bytearray(pair_to_bytes(model))
        raw[4] = 9  # corrupt the K header field
        path = tmp_path / "pair.bin"
        path.write_bytes(bytes(raw))
        with pytest.raises(FormatError):
            load_pair(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        xs, xp = quick_data()
        cfg = TrainConfig(k_units=3, epochs=1, minibatch_size=16, seed=1)
        model = train_pair(xs, xp, cfg)
        path = tmp_path / "pair.bin"
        path.write_bytes(pair_to_bytes(model) + b"junk")
        with pytest.raises(FormatError):
            load_pair(path)

    def test_unit_count_mismatch_rejected(self):
        a = Rbm(np.zeros((3, 2)), np.zeros(2), np.zeros(3))
        b = Rbm(np.zeros((3, 4)), np.zeros(4), np.zeros(3))
        with pytest.raises(DimensionError):
            PairedModel(rbm_subject=a, rbm_scene=b)


class TestCouplingEffect:
    def test_coupling_raises_cross_modal_correlation(self):
        # One seed here; the acceptance suite runs the 5-seed majority check.
        subject, scene, _ = synth_paired(160, 4, 0.1, seed=0, dim_subject=40, dim_scene=25)
        xs, xp = normalize(subject), normalize(scene)
        base = dict(k_units=4, epochs=60, minibatch_size=32, seed=0)
        corr = {}
        for lam in (0.0, 0.5):
            model = train_pair(xs, xp, TrainConfig(lambda_subject=lam, lambda_scene=lam, **base))
            z_s = hidden_probs(model.rbm_subject, xs.data.astype(float))
            z_p = hidden_probs(model.rbm_scene, xp.data.astype(float))
            per_unit = []
            for k in range(4):
                c = np.corrcoef(z_s[:, k], z_p[:, k])[0, 1]
                per_unit.append(0.0 if np.isnan(c) else c)
            corr[lam] = float(np.mean(per_unit))
        assert corr[0.5] > corr[0.0]
