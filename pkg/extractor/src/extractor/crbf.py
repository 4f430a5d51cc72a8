"""Writer for the CRBF feature-file format consumed by the crbm toolkit.

Layout (little-endian): magic "CRBF" | version u32 = 1 | T u32 | D u32
| fps f32 | modality u8 {0=subject, 1=scene, 2=pixels} | 3 zero bytes
| label-block length u32 | UTF-8 newline-separated labels | T*D float32
row-major payload. No trailing bytes.
"""

import struct

import numpy as np

MODALITY_CODES = {"subject": 0, "scene": 1, "pixels": 2}
_HEADER = struct.Struct("<4sIIIfB3x")
_U32 = struct.Struct("<I")


def write_crbf(path, data: np.ndarray, fps: float, modality: str, labels=None) -> None:
    arr = np.ascontiguousarray(data, dtype="<f4")
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"payload must be a non-empty 2-D matrix, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("payload contains non-finite values")
    block = b""
    if labels is not None:
        if len(labels) != arr.shape[1]:
            raise ValueError(f"{len(labels)} labels for D={arr.shape[1]}")
        block = "\n".join(str(s) for s in labels).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"CRBF", 1, arr.shape[0], arr.shape[1],
                              float(np.float32(fps)), MODALITY_CODES[modality]))
        fh.write(_U32.pack(len(block)))
        fh.write(block)
        fh.write(arr.tobytes())
