import numpy as np
import pytest

from crbm import (
    FeatureMatrix,
    best_of_restarts,
    kmeans_keyframes,
    lloyd,
    uniform_summary,
    uniform_timestamps,
)
from crbm.errors import CapacityError, DataError

from oracles import brute_force_kmeans


class TestUniform:
    def test_example_grid(self):
        assert uniform_timestamps(8.0, 4).tolist() == [1.0, 3.0, 5.0, 7.0]

    def test_fifty_minute_episode(self):
        got = uniform_timestamps(3000.0, 8)
        assert got[0] == 187.5
        assert got[1] == 562.5
        assert got[-1] == 2812.5

    def test_single_keyframe_is_midpoint(self):
        assert uniform_timestamps(10.0, 1).tolist() == [5.0]

    def test_always_inside_and_evenly_spaced(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            d = float(rng.uniform(0.1, 10000.0))
            k = int(rng.integers(1, 50))
            t = uniform_timestamps(d, k)
            assert np.all(t > 0.0)
            assert np.all(t < d)
            if k > 1:
                assert np.allclose(np.diff(t), d / k)

    def test_summary_view(self):
        s = uniform_summary(8.0, 4, fps=1.0)
        assert s.scheme == "uniform"
        assert s.timings.tolist() == [1.0, 3.0, 5.0, 7.0]
        assert s.frame_indices.tolist() == [1, 3, 5, 7]

    def test_bad_duration(self):
        with pytest.raises(ValueError):
            uniform_timestamps(0.0, 3)


class TestLloyd:
    def test_separable_points(self):
        points = np.array([[0.0], [0.0], [10.0], [10.0]])
        res = lloyd(points, 2, seed=0)
        assert res.inertia == 0.0
        assert sorted(res.centroids[:, 0].tolist()) == [0.0, 10.0]
        assert res.assignments[0] == res.assignments[1]
        assert res.assignments[2] == res.assignments[3]

    def test_k_equals_t(self):
        rng = np.random.default_rng(3)
        points = rng.uniform(size=(5, 2))
        res = lloyd(points, 5, seed=1)
        assert res.inertia < 1e-12
        assert sorted(res.assignments.tolist()) == [0, 1, 2, 3, 4]

    def test_matches_brute_force_with_restarts(self):
        rng = np.random.default_rng(44)
        for _ in range(6):
            points = rng.standard_normal((8, 2))
            best = best_of_restarts(points, 2, runs=100)
            want = brute_force_kmeans(points, 2)
            assert abs(best.inertia - want) < 1e-9

    def test_inertia_history_non_increasing(self):
        rng = np.random.default_rng(45)
        for _ in range(10):
            points = rng.standard_normal((int(rng.integers(10, 40)), int(rng.integers(1, 4))))
            res = lloyd(points, int(rng.integers(2, 5)), seed=int(rng.integers(100)))
            hist = np.array(res.inertia_history)
            assert np.all(np.diff(hist) <= 1e-9)
            # reported inertia matches a recomputation from the returned state
            recomputed = ((points - res.centroids[res.assignments]) ** 2).sum()
            assert abs(res.inertia - recomputed) <= 1e-9 * max(recomputed, 1.0)

    def test_every_cluster_nonempty(self):
        # duplicated points force empty-cluster repair
        points = np.array([[0.0], [0.0], [0.0], [10.0]])
        res = lloyd(points, 3, seed=2)
        assert set(res.assignments.tolist()) == {0, 1, 2}

    def test_deterministic(self):
        rng = np.random.default_rng(46)
        points = rng.uniform(size=(20, 3))
        a = lloyd(points, 3, seed=9)
        b = lloyd(points, 3, seed=9)
        assert a.centroids.tobytes() == b.centroids.tobytes()
        assert np.array_equal(a.assignments, b.assignments)
        assert a.inertia == b.inertia

    def test_capacity(self):
        with pytest.raises(CapacityError):
            lloyd(np.zeros((2, 1)), 3, seed=0)

    def test_restart_prefix_monotone(self):
        rng = np.random.default_rng(47)
        points = rng.standard_normal((30, 2))
        worse = best_of_restarts(points, 3, runs=2)
        better = best_of_restarts(points, 3, runs=8)
        assert better.inertia <= worse.inertia


def pixel_matrix(rows, fps=1.0):
    return FeatureMatrix(data=np.asarray(rows, dtype=np.float32), fps=fps, modality="pixels")


class TestKmeansKeyframes:
    def test_separable_example_takes_earliest_members(self):
        base = np.zeros((4, 3072), dtype=np.float32)
        base[2:] = 10.0
        summary = kmeans_keyframes(pixel_matrix(base), 2, runs=5)
        assert summary.frame_indices.tolist() == [0, 2]
        assert summary.unit_scores.tolist() == [0.0, 0.0]
        assert summary.scheme == "kmeans"

    def test_keyframes_minimize_distance_within_cluster(self):
        rng = np.random.default_rng(33)
        data = rng.uniform(size=(30, 16))
        pixels = FeatureMatrix(data=data, fps=2.0, modality="pixels")
        summary = kmeans_keyframes(pixels, 4, runs=20)
        best = best_of_restarts(data.astype(np.float64), 4, runs=20)
        data64 = pixels.data.astype(np.float64)
        for unit, frame in zip(summary.unit_indices, summary.frame_indices):
            members = np.flatnonzero(best.assignments == unit)
            assert frame in members
            dists = np.linalg.norm(data64[members] - best.centroids[unit], axis=1)
            assert np.linalg.norm(data64[frame] - best.centroids[unit]) <= dists.min() + 1e-12

    def test_requires_pixel_modality(self):
        m = FeatureMatrix(data=np.zeros((4, 8)), fps=1.0, modality="scene")
        with pytest.raises(DataError):
            kmeans_keyframes(m, 2, runs=1)

    def test_threaded_matches_serial(self):
        rng = np.random.default_rng(34)
        data = rng.uniform(size=(25, 12))
        serial = best_of_restarts(data, 3, runs=12, threads=1)
        threaded = best_of_restarts(data, 3, runs=12, threads=4)
        assert serial.seed == threaded.seed
        assert serial.inertia == threaded.inertia
        assert serial.centroids.tobytes() == threaded.centroids.tobytes()
