import numpy as np
import pytest

from crbm import (
    CategoryLabels,
    FeatureMatrix,
    TrainConfig,
    hidden_probs,
    normalize,
    select_keyframes,
    frame_descriptor,
    synth_paired,
    top_categories,
    top_frames,
    train_pair,
    unit_average_image,
    unit_report,
    write_ppm,
    write_unit_reports,
)
from crbm.errors import DataError, DegenerateWeightError, LabelError
from crbm.rbm import Rbm


@pytest.fixture(scope="module")
def setup():
    subject, scene, _ = synth_paired(50, 3, 0.08, seed=2, dim_subject=10, dim_scene=6)
    xs, xp = normalize(subject), normalize(scene)
    cfg = TrainConfig(k_units=3, epochs=10, minibatch_size=16, seed=1)
    model = train_pair(xs, xp, cfg)
    rng = np.random.default_rng(77)
    pixels = FeatureMatrix(data=rng.uniform(size=(50, 3072)), fps=1.0, modality="pixels")
    return model, xs, xp, pixels


class TestTopFrames:
    def test_top_one_matches_single_modality_keyframe(self, setup):
        model, xs, xp, _ = setup
        scores = frame_descriptor(model, xs, xp, 1.0)
        summary = select_keyframes(scores, xs.fps, distinct=False)
        by_unit = dict(zip(summary.unit_indices.tolist(), summary.frame_indices.tolist()))
        for unit in range(model.k_units):
            frame, _ = top_frames(model, xs, unit, n=1)[0]
            assert frame == by_unit[unit]

    def test_constant_features_tie_break_in_frame_order(self, setup):
        model, xs, _, _ = setup
        flat = FeatureMatrix(data=np.full((9, 10), 0.3), fps=1.0, modality="subject")
        got = top_frames(model, flat, 0, n=5)
        assert [f for f, _ in got] == [0, 1, 2, 3, 4]

    def test_exhaustive_scan_agrees(self, setup):
        model, xs, _, _ = setup
        acts = hidden_probs(model.rbm_subject, xs.data.astype(float))
        for unit in range(model.k_units):
            got = top_frames(model, xs, unit, n=10)
            included = {f for f, _ in got}
            floor = min(a for _, a in got)
            for frame in range(xs.frames):
                if frame not in included:
                    assert acts[frame, unit] <= floor

    def test_full_length_is_a_sorted_permutation(self, setup):
        model, xs, _, _ = setup
        got = top_frames(model, xs, 1, n=xs.frames)
        assert sorted(f for f, _ in got) == list(range(xs.frames))
        acts = [a for _, a in got]
        assert acts == sorted(acts, reverse=True)

    def test_caps_at_frame_count(self, setup):
        model, xs, _, _ = setup
        assert len(top_frames(model, xs, 0, n=100)) == xs.frames

    def test_unit_out_of_range(self, setup):
        model, xs, _, _ = setup
        with pytest.raises(IndexError):
            top_frames(model, xs, 99)

    def test_pixels_have_no_rbm(self, setup):
        model, _, _, pixels = setup
        with pytest.raises(DataError):
            top_frames(model, pixels, 0)


class TestUnitAverageImage:
    def test_single_frame_identity(self, setup):
        _, _, _, pixels = setup
        img = unit_average_image([(3, 0.7)], pixels)
        assert np.allclose(img, pixels.data[3].reshape(32, 32, 3), atol=1e-7)

    def test_identical_frames_any_weights(self, setup):
        _, _, _, pixels = setup
        clone = FeatureMatrix(
            data=np.tile(pixels.data[5], (4, 1)), fps=1.0, modality="pixels"
        )
        img = unit_average_image([(0, 1.0), (2, 3.5)], clone)
        assert np.allclose(img, pixels.data[5].reshape(32, 32, 3), atol=1e-6)

    def test_weighted_mean_arithmetic(self, setup):
        _, _, _, pixels = setup
        img = unit_average_image([(1, 1.0), (2, 3.0)], pixels)
        want = 0.25 * pixels.data[1] + 0.75 * pixels.data[2]
        assert np.allclose(img, want.reshape(32, 32, 3).astype(np.float64), atol=1e-7)

    def test_output_bounded(self, setup):
        _, _, _, pixels = setup
        img = unit_average_image([(0, 0.2), (4, 0.9), (7, 0.4)], pixels)
        assert img.min() >= 0.0
        assert img.max() <= 1.0

    def test_zero_weights_rejected(self, setup):
        _, _, _, pixels = setup
        with pytest.raises(DegenerateWeightError):
            unit_average_image([(0, 0.0), (1, 0.0)], pixels)

    def test_negative_weights_rejected(self, setup):
        _, _, _, pixels = setup
        with pytest.raises(DataError):
            unit_average_image([(0, -0.1)], pixels)


class TestTopCategories:
    def test_dominant_dimension_first(self):
        w = np.zeros((4, 2))
        w[2, 0] = 5.0
        rbm = Rbm(w, np.zeros(2), np.zeros(4))
        labels = CategoryLabels(labels=("a", "b", "c", "d"), modality="subject")
        got = top_categories(rbm, labels, 0)
        assert got[0] == ("c", 5.0)

    def test_full_ranking_is_a_permutation(self):
        rng = np.random.default_rng(5)
        w = rng.standard_normal((6, 2))
        rbm = Rbm(w, np.zeros(2), np.zeros(6))
        labels = CategoryLabels(labels=tuple("abcdef"), modality="scene")
        got = top_categories(rbm, labels, 1, n=6)
        assert sorted(name for name, _ in got) == sorted("abcdef")
        weights = [v for _, v in got]
        assert weights == sorted(weights, reverse=True)

    def test_matches_sort_oracle(self):
        rng = np.random.default_rng(6)
        w = rng.standard_normal((30, 3))
        rbm = Rbm(w, np.zeros(3), np.zeros(30))
        labels = CategoryLabels(labels=tuple(f"dim{i}" for i in range(30)), modality="subject")
        got = [name for name, _ in top_categories(rbm, labels, 2, n=30)]
        want = [f"dim{i}" for i in np.argsort(-w[:, 2], kind="stable")]
        assert got == want

    def test_invariant_under_positive_rescale(self):
        rng = np.random.default_rng(7)
        w = rng.standard_normal((10, 2))
        labels = CategoryLabels(labels=tuple(f"d{i}" for i in range(10)), modality="subject")
        a = top_categories(Rbm(w, np.zeros(2), np.zeros(10)), labels, 0)
        b = top_categories(Rbm(3.0 * w, np.zeros(2), np.zeros(10)), labels, 0)
        assert [name for name, _ in a] == [name for name, _ in b]

    def test_label_length_must_match(self):
        rbm = Rbm(np.zeros((4, 2)), np.zeros(2), np.zeros(4))
        labels = CategoryLabels(labels=("x",), modality="subject")
        with pytest.raises(LabelError):
            top_categories(rbm, labels, 0)


class TestReports:
    def test_ppm_layout(self, tmp_path):
        img = np.zeros((32, 32, 3))
        img[0, 0] = [1.0, 0.5, 0.0]
        path = tmp_path / "unit.ppm"
        write_ppm(img, path)
        raw = path.read_bytes()
        assert raw.startswith(b"P6\n32 32\n255\n")
        body = raw[len(b"P6\n32 32\n255\n") :]
        assert len(body) == 32 * 32 * 3
        assert body[0] == 255
        assert body[1] == 128  # round(0.5 * 255)
        assert body[2] == 0

    def test_write_unit_reports(self, setup, tmp_path):
        model, xs, xp, pixels = setup
        labels = {
            "subject": CategoryLabels(labels=tuple(f"s{i}" for i in range(10)), modality="subject"),
            "scene": CategoryLabels(labels=tuple(f"p{i}" for i in range(6)), modality="scene"),
        }
        out = tmp_path / "reports"
        written = write_unit_reports(
            model, out, {"subject": xs, "scene": xp}, labels, pixels, n=10
        )
        tsvs = [p for p in written if p.endswith(".tsv")]
        ppms = [p for p in written if p.endswith(".ppm")]
        assert len(tsvs) == 2 * model.k_units
        assert len(ppms) == 2 * model.k_units
        text = (out / "subject_unit_00.tsv").read_text()
        lines = text.strip().split("\n")
        assert lines[0].startswith("#unit=0 modality=subject")
        assert any(line.startswith("#categories_subject=") for line in lines)
        assert any(line.startswith("#categories_scene=") for line in lines)
        records = [ln for ln in lines if not ln.startswith("#")]
        assert len(records) == 10
        report = unit_report(model, 0, xs, labels, pixels, n=10)
        frame, act = report.top_frames[0]
        first = records[0].split("\t")
        assert int(first[1]) == frame
        assert abs(float(first[3]) - act) < 1e-8
