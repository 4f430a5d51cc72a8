"""Looking inside the model: what does each hidden unit respond to?

For every unit: the frames that activate it most, the input categories with
the largest weights, and an activation-weighted average image rendered as a
binary PPM.
"""

import tempfile
from pathlib import Path

import numpy as np

from crbm import (
    CategoryLabels,
    FeatureMatrix,
    TrainConfig,
    normalize,
    synth_paired,
    top_categories,
    top_frames,
    train_pair,
    write_unit_reports,
)

out_dir = Path(tempfile.mkdtemp(prefix="crbm_demo_"))

frames, k = 240, 4
subject, scene, assignment = synth_paired(frames, k, noise=0.1, seed=12,
                                          dim_subject=50, dim_scene=30)
xs, xp = normalize(subject), normalize(scene)
model = train_pair(xs, xp, TrainConfig(k_units=k, epochs=150, minibatch_size=32, seed=3,
                                       lambda_subject=0.25, lambda_scene=0.25))

labels = {
    "subject": CategoryLabels(tuple(f"animal_{i:02d}" for i in range(50)), "subject"),
    "scene": CategoryLabels(tuple(f"place_{i:02d}" for i in range(30)), "scene"),
}

for unit in range(k):
    best = top_frames(model, xs, unit, n=3)
    cats_s = top_categories(model.rbm_subject, labels["subject"], unit)
    cats_p = top_categories(model.rbm_scene, labels["scene"], unit)
    groups = {int(assignment[f]) for f, _ in best}
    print(f"unit {unit}: top frames {[f for f, _ in best]} (latent groups {sorted(groups)})")
    print(f"         subject categories: {[name for name, _ in cats_s]}")
    print(f"         scene   categories: {[name for name, _ in cats_p]}")

# Pixel frames so the reports include average images.
rng = np.random.default_rng(4)
palette = rng.uniform(size=(k, 3072))
pixels = FeatureMatrix(data=np.clip(
    palette[assignment] + 0.03 * rng.standard_normal((frames, 3072)), 0, 1),
    fps=1.0, modality="pixels")

written = write_unit_reports(model, out_dir, {"subject": xs, "scene": xp},
                             labels, pixels, n=100)
print(f"\nwrote {len(written)} report files to {out_dir}")
print("sample:", Path(written[0]).name, "...", Path(written[-1]).name)
