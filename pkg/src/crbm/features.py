"""Per-frame descriptor matrices: binary file format, normalization, synthesis.

A feature file stores one modality of a video as a T x D float32 matrix
sampled at a fixed rate, so the rest of the toolkit never touches video.
Layout (little-endian, no trailing bytes):

    magic "CRBF" | version u32 = 1 | T u32 | D u32 | fps f32
    | modality u8 {0=subject, 1=scene, 2=pixels} | 3 zero pad bytes
    | label-block length u32 L | L bytes UTF-8 newline-separated labels
    | T*D float32 row-major payload
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlignmentError,
    DataError,
    FormatError,
    LabelError,
    TruncationError,
    WriteError,
)

MAGIC = b"CRBF"
VERSION = 1

MODALITY_CODES = {"subject": 0, "scene": 1, "pixels": 2}
MODALITY_NAMES = {v: k for k, v in MODALITY_CODES.items()}

# Production descriptor widths per modality. Synthetic fixtures may use any
# width; pipelines that expect real extractor output check against these.
NOMINAL_DIMS = {"subject": 1000, "scene": 205, "pixels": 3072}

_HEADER = struct.Struct("<4sIIIfB3x")
_U32 = struct.Struct("<I")


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """T x D float32 descriptor matrix plus timing metadata.

    Frame t covers time t / fps seconds. Entries must be finite; fps is
    stored at float32 precision so that file round trips are bit-exact.
    """

    data: np.ndarray
    fps: float = 1.0
    modality: str = "subject"

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"feature matrix must be 2-D and non-empty, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise DataError("feature matrix contains non-finite entries")
        fps32 = float(np.float32(self.fps))
        if not (fps32 > 0.0) or not np.isfinite(fps32):
            raise DataError(f"fps must be positive and finite, got {self.fps}")
        if self.modality not in MODALITY_CODES:
            raise DataError(f"unknown modality {self.modality!r}")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "fps", fps32)

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def frame_times(self) -> np.ndarray:
        """Timestamps in seconds: frame t sits at t / fps."""
        return np.arange(self.frames, dtype=np.float64) / self.fps

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return (
            self.modality == other.modality
            and self.fps == other.fps
            and self.data.shape == other.data.shape
            and self.data.tobytes() == other.data.tobytes()
        )


@dataclass(frozen=True)
class CategoryLabels:
    """One name per descriptor dimension of a modality."""

    labels: tuple[str, ...]
    modality: str

    def __post_init__(self):
        if self.modality not in MODALITY_CODES:
            raise DataError(f"unknown modality {self.modality!r}")
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    def __len__(self) -> int:
        return len(self.labels)


def check_nominal_dims(m: FeatureMatrix) -> None:
    """Raise DataError unless m has the production width for its modality."""
    want = NOMINAL_DIMS[m.modality]
    if m.dim != want:
        raise DataError(f"{m.modality} features should have D={want}, got D={m.dim}")


def write_features(m: FeatureMatrix, path, labels: CategoryLabels | None = None) -> None:
    """Write m (and optionally its dimension labels) to a CRBF file."""
    if not np.isfinite(m.data).all():
        raise DataError("refusing to write non-finite feature matrix")
    block = b""
    if labels is not None:
        if len(labels) != m.dim:
            raise LabelError(f"{len(labels)} labels for D={m.dim} features")
        if labels.modality != m.modality:
            raise LabelError(f"label modality {labels.modality!r} != matrix modality {m.modality!r}")
        block = "\n".join(labels.labels).encode("utf-8")
    header = _HEADER.pack(
        MAGIC, VERSION, m.frames, m.dim, m.fps, MODALITY_CODES[m.modality]
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(_U32.pack(len(block)))
            fh.write(block)
            fh.write(m.data.astype("<f4", copy=False).tobytes())
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


def _parse_features(buf: bytes, origin: str) -> tuple[FeatureMatrix, tuple[str, ...] | None]:
    if len(buf) < _HEADER.size:
        raise TruncationError(f"{origin}: file shorter than fixed header")
    magic, version, frames, dim, fps, modality_code = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"{origin}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{origin}: unsupported version {version}")
    if buf[21:24] != b"\x00\x00\x00":
        raise FormatError(f"{origin}: nonzero padding bytes")
    if modality_code not in MODALITY_NAMES:
        raise FormatError(f"{origin}: unknown modality code {modality_code}")
    if frames < 1 or dim < 1:
        raise FormatError(f"{origin}: invalid dimensions T={frames}, D={dim}")
    if not np.isfinite(fps) or fps <= 0.0:
        raise FormatError(f"{origin}: invalid fps {fps}")
    pos = _HEADER.size
    if len(buf) < pos + 4:
        raise TruncationError(f"{origin}: missing label-block length")
    (label_len,) = _U32.unpack_from(buf, pos)
    pos += 4
    if len(buf) < pos + label_len:
        raise TruncationError(f"{origin}: label block truncated")
    labels: tuple[str, ...] | None = None
    if label_len:
        try:
            text = buf[pos : pos + label_len].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{origin}: label block is not UTF-8") from exc
        labels = tuple(text.split("\n"))
        if len(labels) != dim:
            raise FormatError(f"{origin}: {len(labels)} labels for D={dim}")
    pos += label_len
    payload = frames * dim * 4
    if len(buf) < pos + payload:
        raise TruncationError(
            f"{origin}: payload needs {payload} bytes, {len(buf) - pos} present"
        )
    if len(buf) > pos + payload:
        raise FormatError(f"{origin}: {len(buf) - pos - payload} trailing bytes")
    data = np.frombuffer(buf, dtype="<f4", count=frames * dim, offset=pos).reshape(frames, dim)
    if not np.isfinite(data).all():
        raise DataError(f"{origin}: payload contains non-finite entries")
    matrix = FeatureMatrix(data=data.copy(), fps=float(fps), modality=MODALITY_NAMES[modality_code])
    return matrix, labels


def _read_bytes(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def read_features(path) -> FeatureMatrix:
    """Load and validate a CRBF feature file."""
    matrix, _ = _parse_features(_read_bytes(path), str(path))
    return matrix


def read_feature_labels(path) -> CategoryLabels | None:
    """Return the labels embedded in a CRBF file, or None if the block is empty."""
    matrix, labels = _parse_features(_read_bytes(path), str(path))
    if labels is None:
        return None
    return CategoryLabels(labels=labels, modality=matrix.modality)


def read_labels_file(path, modality: str) -> CategoryLabels:
    """Load labels from plain text, one per line; '#' lines are comments."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            names = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    except OSError as exc:
        raise LabelError(f"cannot read labels {path}: {exc}") from exc
    names = [n for n in names if n]
    if not names:
        raise LabelError(f"{path}: no labels found")
    return CategoryLabels(labels=tuple(names), modality=modality)


def normalize(m: FeatureMatrix, mode: str = "minmax_per_dim") -> FeatureMatrix:
    """Condition descriptors into [0, 1] for consumption by binary-unit RBMs.

    minmax_per_dim maps each dimension's observed min to 0 and max to 1;
    constant dimensions map to 0 so dead descriptors stay silent.
    softmax_per_frame turns each row into probabilities, then rescales the
    row so its maximum is 1.
    """
    x = m.data.astype(np.float64)
    if mode == "minmax_per_dim":
        if m.frames < 2:
            raise DataError("minmax_per_dim needs at least 2 frames")
        lo = x.min(axis=0)
        hi = x.max(axis=0)
        span = hi - lo
        dead = span <= 0.0
        span[dead] = 1.0
        out = (x - lo) / span
        out[:, dead] = 0.0
    elif mode == "softmax_per_frame":
        shifted = x - x.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        out = e / e.sum(axis=1, keepdims=True)
        out /= out.max(axis=1, keepdims=True)
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    return FeatureMatrix(data=out, fps=m.fps, modality=m.modality)


def synth_paired(
    frames: int,
    k_latent: int,
    noise: float,
    seed: int,
    fps: float = 1.0,
    dim_subject: int = NOMINAL_DIMS["subject"],
    dim_scene: int = NOMINAL_DIMS["scene"],
) -> tuple[FeatureMatrix, FeatureMatrix, np.ndarray]:
    """Generate aligned subject/scene data with shared latent structure.

    Draws k_latent prototype descriptors per modality, assigns every frame a
    latent index (balanced, shuffled, identical in both modalities) and adds
    Gaussian noise of scale `noise`. Prototypes and the assignment depend
    only on the seed, not on the noise level, so a zero-noise call with the
    same seed reveals the prototypes of a noisy one.
    """
    if not (frames >= k_latent >= 1):
        raise ValueError(f"need T >= K >= 1, got T={frames}, K={k_latent}")
    if noise < 0:
        raise ValueError("noise must be >= 0")
    rng = np.random.default_rng(seed)
    protos_subject = rng.uniform(0.0, 1.0, size=(k_latent, dim_subject))
    protos_scene = rng.uniform(0.0, 1.0, size=(k_latent, dim_scene))
    assignment = (np.arange(frames) % k_latent)[rng.permutation(frames)]
    x_subject = protos_subject[assignment]
    x_scene = protos_scene[assignment]
    if noise > 0:
        x_subject = x_subject + noise * rng.standard_normal(x_subject.shape)
        x_scene = x_scene + noise * rng.standard_normal(x_scene.shape)
    return (
        FeatureMatrix(data=x_subject, fps=fps, modality="subject"),
        FeatureMatrix(data=x_scene, fps=fps, modality="scene"),
        assignment,
    )


def require_aligned(a: FeatureMatrix, b: FeatureMatrix) -> None:
    """Raise AlignmentError unless a and b describe the same frame grid."""
    if a.frames != b.frames:
        raise AlignmentError(f"frame counts differ: {a.frames} vs {b.frames}")
    if a.fps != b.fps:
        raise AlignmentError(f"sampling rates differ: {a.fps} vs {b.fps}")
