"""End-to-end keyframe selection plus the two reference schemes.

A trained pair scores every frame per unit; each unit's argmax timestamp
becomes a keyframe. Uniform sampling ignores content entirely; k-means
clusters downsized pixels and keeps the frame nearest each centroid.
"""

import tempfile
from pathlib import Path

import numpy as np

from crbm import (
    FeatureMatrix,
    TrainConfig,
    format_summary,
    kmeans_keyframes,
    normalize,
    summarize,
    synth_paired,
    train_pair,
    uniform_summary,
)

out_dir = Path(tempfile.mkdtemp(prefix="crbm_demo_"))

# A 5-minute synthetic "video" at 1 fps with 6 latent segments.
frames, k = 300, 6
subject, scene, assignment = synth_paired(frames, k, noise=0.1, seed=21)
xs, xp = normalize(subject), normalize(scene)

cfg = TrainConfig(k_units=k, epochs=150, minibatch_size=32, seed=3,
                  lambda_subject=0.25, lambda_scene=0.25)
model = train_pair(xs, xp, cfg)

print("model summary (alpha=0.5, balanced):")
balanced = summarize(model, xs, xp, alpha=0.5)
print(format_summary(balanced))

print("subject-centric (alpha=1) keyframes land on different peaks:")
subject_centric = summarize(model, xs, xp, alpha=1.0)
print("  frames:", subject_centric.frame_indices.tolist())

print("\nuniform baseline:")
uniform = uniform_summary(frames / xs.fps, k, xs.fps)
print(format_summary(uniform))

# Pixel frames for the k-means baseline: one blurry color per latent group.
rng = np.random.default_rng(3)
palette = rng.uniform(size=(k, 3072))
pixels = FeatureMatrix(
    data=palette[assignment] + 0.05 * rng.standard_normal((frames, 3072)),
    fps=1.0,
    modality="pixels",
)
print("k-means baseline (20 restarts for the demo; production uses 100):")
km = kmeans_keyframes(pixels, k, runs=20)
print(format_summary(km))

# How well does each scheme cover the latent segments?
def coverage(frame_indices):
    return len(set(assignment[list(frame_indices)]))

print(f"latent groups covered -> model: {coverage(balanced.frame_indices)}/{k}, "
      f"uniform: {coverage(uniform.frame_indices)}/{k}, "
      f"k-means: {coverage(km.frame_indices)}/{k}")
