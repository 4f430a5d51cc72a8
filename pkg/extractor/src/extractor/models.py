"""Descriptor model backends.

A backend turns a batch of RGB frames into pre-softmax activation vectors,
one per frame, and names its output dimensions. Two identifier schemes:

  seeded:<classes>[:<seed>]   fixed random two-layer network over 32x32
                              pixels; a deterministic offline stand-in for
                              a classifier with the configured class count
  torchvision:<model_name>    pretrained torchvision classifier; the final
                              fully-connected layer output (pre-softmax)

The seeded backend exists because the toolkit downstream depends only on
descriptor dimensions and per-frame consistency, so pipelines remain fully
testable without pretrained weights.
"""

from __future__ import annotations

import numpy as np

from .errors import ModelLoadError

_SEEDED_INPUT = 32
_SEEDED_HIDDEN = 256


class SeededProjection:
    """Deterministic random-feature network with a pre-softmax output layer."""

    def __init__(self, classes: int, seed: int = 0):
        if classes < 1:
            raise ModelLoadError(f"class count must be >= 1, got {classes}")
        self.classes = classes
        self.input_size = (_SEEDED_INPUT, _SEEDED_INPUT)
        rng = np.random.default_rng(np.random.SeedSequence([seed, classes]))
        d_in = _SEEDED_INPUT * _SEEDED_INPUT * 3
        self._w1 = rng.standard_normal((d_in, _SEEDED_HIDDEN)) / np.sqrt(d_in)
        self._b1 = 0.1 * rng.standard_normal(_SEEDED_HIDDEN)
        self._w2 = rng.standard_normal((_SEEDED_HIDDEN, classes)) / np.sqrt(_SEEDED_HIDDEN)
        self._b2 = 0.1 * rng.standard_normal(classes)
        self.labels = [f"class_{i:04d}" for i in range(classes)]
        self.preprocessing = (
            f"RGB frames resized to {_SEEDED_INPUT}x{_SEEDED_INPUT} (area interpolation), "
            "scaled to [0,1], flattened row-major"
        )

    def features(self, frames: np.ndarray) -> np.ndarray:
        """frames: N x H x W x 3 float32 in [0,1] at input_size."""
        x = frames.reshape(frames.shape[0], -1).astype(np.float64)
        hidden = np.tanh(x @ self._w1 + self._b1)
        return (hidden @ self._w2 + self._b2).astype(np.float32)


class TorchvisionClassifier:
    """Pretrained torchvision model; descriptors are the classifier logits."""

    def __init__(self, model_name: str):
        try:
            import torch
            import torchvision.models as tvm
        except ImportError as exc:
            raise ModelLoadError(f"torchvision backend unavailable: {exc}") from exc
        try:
            weights = tvm.get_model_weights(model_name).DEFAULT
            model = tvm.get_model(model_name, weights=weights)
        except Exception as exc:
            raise ModelLoadError(f"cannot load torchvision model {model_name!r}: {exc}") from exc
        model.eval()
        self._torch = torch
        self._model = model
        self._transform = weights.transforms()
        self.labels = list(weights.meta["categories"])
        self.classes = len(self.labels)
        crop = getattr(self._transform, "crop_size", [224])
        size = crop[0] if isinstance(crop, (list, tuple)) else int(crop)
        self.input_size = (size, size)
        self.preprocessing = (
            f"torchvision {model_name} default transforms on RGB frames "
            f"(resize + center crop to {size}, ImageNet normalization)"
        )

    def features(self, frames: np.ndarray) -> np.ndarray:
        torch = self._torch
        torch.set_num_threads(1)  # keeps repeated runs byte-identical
        with torch.no_grad():
            batch = torch.from_numpy(frames).permute(0, 3, 1, 2).contiguous()
            logits = self._model(self._transform(batch))
        return logits.numpy().astype(np.float32)


def load_model(spec: str, default_seed: int = 0):
    """Resolve a model identifier string into a backend instance."""
    scheme, _, rest = spec.partition(":")
    if scheme == "seeded":
        parts = rest.split(":") if rest else []
        if not parts or not parts[0]:
            raise ModelLoadError(f"{spec!r}: expected seeded:<classes>[:<seed>]")
        try:
            classes = int(parts[0])
            seed = int(parts[1]) if len(parts) > 1 else default_seed
        except ValueError as exc:
            raise ModelLoadError(f"{spec!r}: expected seeded:<classes>[:<seed>]") from exc
        return SeededProjection(classes, seed)
    if scheme == "torchvision":
        if not rest:
            raise ModelLoadError(f"{spec!r}: expected torchvision:<model_name>")
        return TorchvisionClassifier(rest)
    raise ModelLoadError(f"unknown model identifier scheme {scheme!r} in {spec!r}")
