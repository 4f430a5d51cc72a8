"""Comparison schemes: uniform temporal sampling and k-means over pixels."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DataError
from .features import FeatureMatrix
from .summary import Summary


def uniform_timestamps(duration: float, k: int) -> np.ndarray:
    """K evenly spaced timestamps t_i = (d/K) * (1/2 + i), i = 0..K-1.

    Centers of K equal segments, so every timestamp lies strictly inside
    (0, duration).
    """
    if not (duration > 0):
        raise ValueError(f"duration must be > 0, got {duration}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return (duration / k) * (0.5 + np.arange(k, dtype=np.float64))


def uniform_summary(duration: float, k: int, fps: float = 1.0) -> Summary:
    """Uniform-sampling baseline as a Summary; scores carry no meaning (0)."""
    times = uniform_timestamps(duration, k)
    frames = np.floor(times * fps).astype(np.int64)
    return Summary(
        unit_indices=np.arange(k),
        frame_indices=frames,
        timings=times,
        unit_scores=np.zeros(k),
        alpha=np.full(k, 0.5),
        fps=float(fps),
        scheme="uniform",
    )


@dataclass(frozen=True)
class KMeansResult:
    """One Lloyd run: final partition, centroids, objective and trace."""

    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations: int
    seed: int
    inertia_history: tuple[float, ...]


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (T, K) squared Euclidean distances, computed stably via the direct form.
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("tkd,tkd->tk", diff, diff)


def _inertia(points: np.ndarray, centroids: np.ndarray, assign: np.ndarray) -> float:
    diff = points - centroids[assign]
    return float(np.einsum("td,td->", diff, diff))


def lloyd(points: np.ndarray, k: int, seed: int, max_iter: int = 300) -> KMeansResult:
    """Plain Lloyd clustering with seeded random initialization.

    Initial centroids are K distinct points chosen uniformly. Iterates
    assignment and mean updates until assignments stop changing or max_iter;
    a cluster left empty seizes the point currently farthest from its own
    centroid. Inertia never increases between iterations.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise DataError(f"points must be T x D, got shape {points.shape}")
    t = points.shape[0]
    if t < k:
        raise CapacityError(f"need at least K={k} points, got {t}")
    rng = np.random.default_rng(seed)
    centroids = points[rng.choice(t, size=k, replace=False)].copy()

    assign = np.full(t, -1, dtype=np.int64)
    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        d2 = _sq_dists(points, centroids)
        new_assign = d2.argmin(axis=1)
        # Repair empty clusters by seizing the worst-placed point.
        counts = np.bincount(new_assign, minlength=k)
        for cluster in np.flatnonzero(counts == 0):
            cost = d2[np.arange(t), new_assign].copy()
            cost[counts[new_assign] <= 1] = -np.inf  # do not empty another cluster
            victim = int(np.argmax(cost))
            counts[new_assign[victim]] -= 1
            new_assign[victim] = cluster
            counts[cluster] += 1
        iterations += 1
        converged = (new_assign == assign).all()
        assign = new_assign
        for cluster in range(k):
            centroids[cluster] = points[assign == cluster].mean(axis=0)
        history.append(_inertia(points, centroids, assign))
        if converged:
            break
    return KMeansResult(
        assignments=assign,
        centroids=centroids,
        inertia=history[-1],
        iterations=iterations,
        seed=seed,
        inertia_history=tuple(history),
    )


def best_of_restarts(
    points: np.ndarray, k: int, runs: int, max_iter: int = 300, threads: int = 1
) -> KMeansResult:
    """Lowest-inertia result over seeds 0..runs-1; ties go to the lowest seed."""
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    seeds = range(runs)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: lloyd(points, k, s, max_iter), seeds))
    else:
        results = [lloyd(points, k, s, max_iter) for s in seeds]
    return min(results, key=lambda r: (r.inertia, r.seed))


def kmeans_keyframes(
    pixels: FeatureMatrix, k: int, runs: int = 100, max_iter: int = 300, threads: int = 1
) -> Summary:
    """k-means baseline: cluster pixel frames, keep the frame nearest each centroid.

    Within a cluster, distance ties resolve to the earliest frame; the
    cluster index is reported as the unit index and the distance as the
    score. Restart count defaults to 100 seeds.
    """
    if pixels.modality != "pixels":
        raise DataError(f"k-means baseline expects pixel features, got {pixels.modality!r}")
    data = pixels.data.astype(np.float64)
    best = best_of_restarts(data, k, runs, max_iter, threads)
    frames = np.empty(k, dtype=np.int64)
    dists = np.empty(k)
    for cluster in range(k):
        members = np.flatnonzero(best.assignments == cluster)
        d = np.linalg.norm(data[members] - best.centroids[cluster], axis=1)
        pick = int(np.argmin(d))  # argmin takes the first, i.e. earliest, on ties
        frames[cluster] = members[pick]
        dists[cluster] = d[pick]
    order = np.lexsort((np.arange(k), frames))
    return Summary(
        unit_indices=np.arange(k)[order],
        frame_indices=frames[order],
        timings=frames[order] / pixels.fps,
        unit_scores=dists[order],
        alpha=np.full(k, 0.5),
        fps=pixels.fps,
        scheme="kmeans",
    )
