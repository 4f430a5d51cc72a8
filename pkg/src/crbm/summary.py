"""Keyframe selection: combined frame scores and per-unit maximum response."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DataError, DimensionError, WriteError
from .features import FeatureMatrix, require_aligned
from .coreg import PairedModel
from .rbm import hidden_probs


@dataclass(frozen=True)
class Summary:
    """K selected keyframes, sorted by time.

    Parallel arrays: record i pairs unit_indices[i] with frame_indices[i],
    timings[i] (seconds) and unit_scores[i] (the response that won the
    frame). alpha is the per-unit balance used to build the scores; scheme
    is None for model summaries, or the baseline name.
    """

    unit_indices: np.ndarray
    frame_indices: np.ndarray
    timings: np.ndarray
    unit_scores: np.ndarray
    alpha: np.ndarray
    fps: float
    scheme: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "unit_indices", np.asarray(self.unit_indices, dtype=np.int64))
        object.__setattr__(self, "frame_indices", np.asarray(self.frame_indices, dtype=np.int64))
        object.__setattr__(self, "timings", np.asarray(self.timings, dtype=np.float64))
        object.__setattr__(self, "unit_scores", np.asarray(self.unit_scores, dtype=np.float64))
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=np.float64))
        n = len(self.unit_indices)
        for name in ("frame_indices", "timings", "unit_scores"):
            if len(getattr(self, name)) != n:
                raise DimensionError(f"summary field {name} has length != {n}")

    @property
    def k(self) -> int:
        return len(self.unit_indices)


def broadcast_alpha(alpha, k: int) -> np.ndarray:
    """Accept a scalar or a K-vector; validate entries in [0, 1]."""
    arr = np.asarray(alpha, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(k, float(arr))
    if arr.shape != (k,):
        raise DimensionError(f"alpha must be scalar or length {k}, got shape {arr.shape}")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DataError("alpha entries must lie in [0, 1]")
    return arr


def frame_descriptor(
    model: PairedModel,
    x_subject: FeatureMatrix,
    x_scene: FeatureMatrix,
    alpha=0.5,
) -> np.ndarray:
    """T x K combined response: alpha_k * subject unit k + (1 - alpha_k) * scene unit k."""
    require_aligned(x_subject, x_scene)
    a = broadcast_alpha(alpha, model.k_units)
    z_subject = hidden_probs(model.rbm_subject, x_subject.data.astype(np.float64))
    z_scene = hidden_probs(model.rbm_scene, x_scene.data.astype(np.float64))
    return a * z_subject + (1.0 - a) * z_scene


def select_keyframes(
    scores: np.ndarray,
    fps: float,
    distinct: bool = True,
    alpha=None,
    scheme: str | None = None,
) -> Summary:
    """Pick, for every unit, the frame with the maximum response.

    Ties go to the earliest frame. With distinct=True a frame may serve only
    one unit: units are processed in descending order of their winning
    score, and a unit whose peak is already claimed takes its best remaining
    frame. The result is sorted by time.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise DimensionError(f"scores must be T x K, got shape {scores.shape}")
    frames, k = scores.shape
    if distinct and frames < k:
        raise CapacityError(f"need T >= K for distinct selection, got T={frames}, K={k}")

    if distinct:
        peak = scores.max(axis=0)
        # Highest-peaked unit claims first; ties by unit index.
        unit_order = np.lexsort((np.arange(k), -peak))
        chosen = np.empty(k, dtype=np.int64)
        available = np.ones(frames, dtype=bool)
        for unit in unit_order:
            col = np.where(available, scores[:, unit], -np.inf)
            best = int(np.argmax(col))
            chosen[unit] = best
            available[best] = False
    else:
        chosen = scores.argmax(axis=0).astype(np.int64)

    units = np.arange(k, dtype=np.int64)
    timings = chosen / fps
    won = scores[chosen, units]
    order = np.lexsort((units, timings))
    if alpha is None:
        alpha = np.full(k, 0.5)
    return Summary(
        unit_indices=units[order],
        frame_indices=chosen[order],
        timings=timings[order],
        unit_scores=won[order],
        alpha=broadcast_alpha(alpha, k),
        fps=float(fps),
        scheme=scheme,
    )


def summarize(
    model: PairedModel,
    x_subject: FeatureMatrix,
    x_scene: FeatureMatrix,
    alpha=0.5,
    distinct: bool = True,
) -> Summary:
    """frame_descriptor + select_keyframes in one call."""
    a = broadcast_alpha(alpha, model.k_units)
    scores = frame_descriptor(model, x_subject, x_scene, a)
    return select_keyframes(scores, x_subject.fps, distinct=distinct, alpha=a)


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def format_summary(s: Summary, fmt: str = "tsv") -> str:
    """Render the manifest: a header line then one TSV record per keyframe.

    The JSON variant carries identical fields.
    """
    if fmt == "tsv":
        if s.scheme is None:
            head = f"#K={s.k} alpha={','.join(_fmt(a) for a in s.alpha)} fps={_fmt(s.fps)}"
        else:
            head = f"#scheme={s.scheme} K={s.k} fps={_fmt(s.fps)}"
        rows = [
            f"{u}\t{f}\t{t:.6f}\t{_fmt(v)}"
            for u, f, t, v in zip(s.unit_indices, s.frame_indices, s.timings, s.unit_scores)
        ]
        return "\n".join([head, *rows]) + "\n"
    if fmt == "json":
        doc = {
            "k": s.k,
            "alpha": [float(a) for a in s.alpha],
            "fps": s.fps,
            "scheme": s.scheme,
            "keyframes": [
                {"unit": int(u), "frame": int(f), "time": float(t), "score": float(v)}
                for u, f, t, v in zip(s.unit_indices, s.frame_indices, s.timings, s.unit_scores)
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown manifest format {fmt!r}")


def write_summary(s: Summary, path, fmt: str = "tsv") -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(format_summary(s, fmt))
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc
