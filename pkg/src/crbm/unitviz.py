"""Per-unit analysis: top-activating frames, average images, category readout."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateWeightError, DimensionError, LabelError, WriteError
from .features import CategoryLabels, FeatureMatrix
from .coreg import PairedModel
from .rbm import Rbm, hidden_probs

IMAGE_SHAPE = (32, 32, 3)


def _rbm_for_modality(model: PairedModel, modality: str) -> Rbm:
    if modality == "subject":
        return model.rbm_subject
    if modality == "scene":
        return model.rbm_scene
    raise DataError(f"no RBM for modality {modality!r}")


def top_frames(
    model: PairedModel, features: FeatureMatrix, unit: int, n: int = 100
) -> list[tuple[int, float]]:
    """The n frames that most strongly activate `unit` in this modality.

    Descending activation, ties resolved to the earliest frame.
    """
    rbm = _rbm_for_modality(model, features.modality)
    if not 0 <= unit < rbm.n_hidden:
        raise IndexError(f"unit {unit} out of range for K={rbm.n_hidden}")
    acts = hidden_probs(rbm, features.data.astype(np.float64))[:, unit]
    order = np.argsort(-acts, kind="stable")[: min(n, len(acts))]
    return [(int(i), float(acts[i])) for i in order]


def unit_average_image(top: list[tuple[int, float]], pixels: FeatureMatrix) -> np.ndarray:
    """Activation-weighted average of the listed frames as a 32x32x3 image."""
    if pixels.modality != "pixels":
        raise DataError(f"expected pixel features, got {pixels.modality!r}")
    if pixels.dim != int(np.prod(IMAGE_SHAPE)):
        raise DimensionError(f"pixel features must have D={int(np.prod(IMAGE_SHAPE))}, got {pixels.dim}")
    if not top:
        raise DegenerateWeightError("no frames to average")
    idx = np.array([f for f, _ in top], dtype=np.int64)
    w = np.array([a for _, a in top], dtype=np.float64)
    if (w < 0).any():
        raise DataError("activation weights must be >= 0")
    total = w.sum()
    if total <= 0.0:
        raise DegenerateWeightError("all activation weights are zero")
    flat = (w[:, None] * pixels.data[idx].astype(np.float64)).sum(axis=0) / total
    return np.clip(flat.reshape(IMAGE_SHAPE), 0.0, 1.0)


def top_categories(
    rbm: Rbm, labels: CategoryLabels, unit: int, n: int = 2
) -> list[tuple[str, float]]:
    """The n input dimensions with the largest signed weight into `unit`."""
    if len(labels) != rbm.n_visible:
        raise LabelError(f"{len(labels)} labels for D={rbm.n_visible} visible units")
    if not 0 <= unit < rbm.n_hidden:
        raise IndexError(f"unit {unit} out of range for K={rbm.n_hidden}")
    col = rbm.weights[:, unit]
    order = np.argsort(-col, kind="stable")[: min(n, len(col))]
    return [(labels.labels[int(i)], float(col[i])) for i in order]


@dataclass(frozen=True)
class UnitReport:
    """Everything the unit manifest needs for one (modality, unit) pair."""

    unit_index: int
    modality: str
    fps: float
    top_frames: list[tuple[int, float]]
    top_categories: dict[str, list[tuple[str, float]]]
    average_image: np.ndarray | None = None


def unit_report(
    model: PairedModel,
    unit: int,
    features: FeatureMatrix,
    labels: dict[str, CategoryLabels] | None = None,
    pixels: FeatureMatrix | None = None,
    n: int = 100,
) -> UnitReport:
    """Assemble the report for one unit in the modality of `features`."""
    frames = top_frames(model, features, unit, n)
    cats: dict[str, list[tuple[str, float]]] = {}
    for modality, lab in (labels or {}).items():
        cats[modality] = top_categories(_rbm_for_modality(model, modality), lab, unit)
    image = unit_average_image(frames, pixels) if pixels is not None else None
    return UnitReport(
        unit_index=unit,
        modality=features.modality,
        fps=features.fps,
        top_frames=frames,
        top_categories=cats,
        average_image=image,
    )


def format_unit_report(report: UnitReport) -> str:
    """TSV manifest: header with categories, then frame/activation records."""
    parts = [f"#unit={report.unit_index} modality={report.modality} fps={report.fps:.9g}"]
    for modality in sorted(report.top_categories):
        pairs = ",".join(f"{name}:{w:.9g}" for name, w in report.top_categories[modality])
        parts.append(f"#categories_{modality}={pairs}")
    for frame, act in report.top_frames:
        parts.append(f"{report.unit_index}\t{frame}\t{frame / report.fps:.6f}\t{act:.9g}")
    return "\n".join(parts) + "\n"


def write_ppm(image: np.ndarray, path) -> None:
    """Write an RGB image in [0,1] as an 8-bit binary PPM (P6)."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionError(f"expected H x W x 3 image, got shape {img.shape}")
    raw = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    header = f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(raw.tobytes())
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


def write_unit_reports(
    model: PairedModel,
    out_dir,
    features: dict[str, FeatureMatrix],
    labels: dict[str, CategoryLabels] | None = None,
    pixels: FeatureMatrix | None = None,
    n: int = 100,
) -> list[str]:
    """Emit one TSV manifest (and PPM, when pixels exist) per modality and unit.

    Returns the paths written, in a deterministic order.
    """
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    for modality in ("subject", "scene"):
        feats = features.get(modality)
        if feats is None:
            continue
        for unit in range(model.k_units):
            report = unit_report(model, unit, feats, labels, pixels, n)
            base = os.path.join(out_dir, f"{modality}_unit_{unit:02d}")
            path = base + ".tsv"
            try:
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(format_unit_report(report))
            except OSError as exc:
                raise WriteError(f"cannot write {path}: {exc}") from exc
            written.append(path)
            if report.average_image is not None:
                img_path = base + ".ppm"
                write_ppm(report.average_image, img_path)
                written.append(img_path)
    return written
