"""Video to feature files: decode, sample, describe, write.

For a sampling rate f, output frame i corresponds to time i / f and takes
the source frame nearest that time. All three outputs (subject and scene
descriptors plus 32x32 RGB pixels) therefore share the same frame count
and timing. Decoding is a single sequential pass, so repeated runs with
the same models produce byte-identical payloads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import cv2
import numpy as np

from .crbf import write_crbf
from .errors import DecodeError
from .models import load_model

PIXEL_SIZE = 32


@dataclass
class ExtractionJob:
    video: str
    out_dir: str
    fps: float = 1.0
    subject_model: str = "seeded:1000"
    scene_model: str = "seeded:205"

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError(f"fps must be > 0, got {self.fps}")


@dataclass
class ExtractionResult:
    frames: int
    fps: float
    paths: dict = field(default_factory=dict)


def sample_indices(n_source: int, source_fps: float, target_fps: float) -> np.ndarray:
    """Source frame index nearest each output time i / target_fps."""
    if n_source < 1:
        raise DecodeError("video contains no frames")
    duration = n_source / source_fps
    count = max(1, int(np.floor(duration * target_fps)))
    times = np.arange(count) / target_fps
    idx = np.rint(times * source_fps).astype(np.int64)
    return np.clip(idx, 0, n_source - 1)


def _decode_samples(job: ExtractionJob) -> np.ndarray:
    """Return the sampled frames as N x H x W x 3 RGB float32 in [0,1]."""
    cap = cv2.VideoCapture(job.video)
    if not cap.isOpened():
        raise DecodeError(f"cannot open video {job.video}")
    try:
        source_fps = cap.get(cv2.CAP_PROP_FPS)
        n_source = int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
        if not source_fps or source_fps <= 0 or not np.isfinite(source_fps):
            raise DecodeError(f"{job.video}: source frame rate unavailable")
        if n_source <= 0:
            raise DecodeError(f"{job.video}: source frame count unavailable")
        wanted = sample_indices(n_source, source_fps, job.fps)
        keep = set(wanted.tolist())
        frames: dict[int, np.ndarray] = {}
        index = 0
        while index <= max(keep):
            ok, frame = cap.read()
            if not ok:
                break
            if index in keep:
                rgb = cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)
                frames[index] = rgb.astype(np.float32) / 255.0
            index += 1
        missing = keep - frames.keys()
        if missing:
            raise DecodeError(f"{job.video}: decode stopped before frame {min(missing)}")
        return np.stack([frames[i] for i in wanted])
    finally:
        cap.release()


def _resize_batch(frames: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    h, w = size
    out = np.empty((frames.shape[0], h, w, 3), dtype=np.float32)
    for i, frame in enumerate(frames):
        out[i] = cv2.resize(frame, (w, h), interpolation=cv2.INTER_AREA)
    return out


def _write_labels(path, model_spec: str, model, count: int) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# class labels for descriptors produced by crbm-extractor\n")
        fh.write(f"# model: {model_spec}\n")
        fh.write(f"# preprocessing: {model.preprocessing}\n")
        fh.write(f"# {count} labels, one per descriptor dimension\n")
        for name in model.labels:
            fh.write(f"{name}\n")


def extract(job: ExtractionJob) -> ExtractionResult:
    """Write <stem>_{subject,scene,pixels}.crbf plus label files to out_dir."""
    subject_model = load_model(job.subject_model)
    scene_model = load_model(job.scene_model)
    frames = _decode_samples(job)
    os.makedirs(job.out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(job.video))[0]
    result = ExtractionResult(frames=frames.shape[0], fps=job.fps)

    pixels = _resize_batch(frames, (PIXEL_SIZE, PIXEL_SIZE))
    flat = np.clip(pixels.reshape(pixels.shape[0], -1), 0.0, 1.0)
    path = os.path.join(job.out_dir, f"{stem}_pixels.crbf")
    write_crbf(path, flat, job.fps, "pixels")
    result.paths["pixels"] = path

    for modality, model, spec in (
        ("subject", subject_model, job.subject_model),
        ("scene", scene_model, job.scene_model),
    ):
        batch = _resize_batch(frames, model.input_size)
        descriptors = model.features(batch)
        path = os.path.join(job.out_dir, f"{stem}_{modality}.crbf")
        write_crbf(path, descriptors, job.fps, modality, labels=model.labels)
        result.paths[modality] = path
        labels_path = os.path.join(job.out_dir, f"{stem}_{modality}.labels.txt")
        _write_labels(labels_path, spec, model, descriptors.shape[1])
        result.paths[f"{modality}_labels"] = labels_path
    return result
