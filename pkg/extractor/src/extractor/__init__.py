"""Turns a video file into the three per-frame feature files (subject and
scene descriptors plus 32x32 RGB pixels) consumed by the crbm toolkit."""

__version__ = "0.1.0"

from .extract import ExtractionJob, ExtractionResult, extract, sample_indices
from .models import SeededProjection, TorchvisionClassifier, load_model
from .crbf import write_crbf

__all__ = [
    "ExtractionJob",
    "ExtractionResult",
    "extract",
    "sample_indices",
    "SeededProjection",
    "TorchvisionClassifier",
    "load_model",
    "write_crbf",
]
