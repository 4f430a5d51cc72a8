import cv2
import numpy as np
import pytest


@pytest.fixture(scope="session")
def clip(tmp_path_factory):
    """A 10-second 8 fps test clip with second-by-second content changes."""
    path = tmp_path_factory.mktemp("video") / "clip.avi"
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"MJPG"), 8.0, (64, 48))
    assert writer.isOpened()
    rng = np.random.default_rng(0)
    for second in range(10):
        base = rng.integers(0, 255, size=3)
        for _ in range(8):
            frame = np.empty((48, 64, 3), dtype=np.uint8)
            frame[:] = base
            noise = rng.integers(0, 30, size=(48, 64, 3), dtype=np.uint8)
            writer.write(cv2.add(frame, noise))
    writer.release()
    return path
