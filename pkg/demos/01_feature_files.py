"""Feature files: synthesize paired descriptors, store them, condition them.

Every other capability consumes these T x D float32 matrices, so this is
the natural place to start. The file format is a small binary container
(magic "CRBF") that round-trips bit-exactly and rejects corruption.
"""

import tempfile
from pathlib import Path

from crbm import normalize, read_features, synth_paired, write_features

out_dir = Path(tempfile.mkdtemp(prefix="crbm_demo_"))

# 120 frames at 1 fps with 4 shared latent groups. The same latent index
# drives both modalities, which is what co-regularization later exploits.
subject, scene, assignment = synth_paired(120, 4, noise=0.1, seed=7)
print(f"subject matrix: {subject.frames} frames x {subject.dim} dims at {subject.fps} fps")
print(f"scene   matrix: {scene.frames} frames x {scene.dim} dims")
print(f"latent assignment of the first 10 frames: {assignment[:10]}")

subject_path = out_dir / "subject.crbf"
write_features(subject, subject_path)
back = read_features(subject_path)
print(f"\nwrote {subject_path} ({subject_path.stat().st_size} bytes)")
print(f"round trip is bit-exact: {back == subject}")

# RBM visible units expect [0, 1]; per-dimension min-max is the default
# conditioning. Constant dimensions map to 0.
conditioned = normalize(subject, "minmax_per_dim")
print(f"\nnormalized range: [{conditioned.data.min():.3f}, {conditioned.data.max():.3f}]")

# Corruption of any header byte is rejected.
raw = bytearray(subject_path.read_bytes())
raw[0] = ord("X")
(out_dir / "corrupt.crbf").write_bytes(bytes(raw))
try:
    read_features(out_dir / "corrupt.crbf")
except Exception as exc:
    print(f"corrupted file rejected: {type(exc).__name__}: {exc}")
