"""Input validation helpers shared across the estimators."""

import numpy as np


def check_box(box):
    """Validate a single (x, y, w, h) box and return it as a float array."""
    b = np.asarray(box, dtype=float).reshape(-1)
    if b.shape[0] != 4:
        raise ValueError(f"box must have 4 entries (x, y, w, h), got {b.shape[0]}")
    if not np.isfinite(b).all():
        raise ValueError("box entries must be finite")
    if b[2] <= 0 or b[3] <= 0:
        raise ValueError(f"box width/height must be positive, got w={b[2]}, h={b[3]}")
    return b


def check_boxes(boxes):
    """Validate an (n, 4) stack of (x, y, w, h) boxes."""
    arr = np.asarray(boxes, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 4)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError(f"boxes must be (n, 4), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("box entries must be finite")
    if (arr[:, 2] <= 0).any() or (arr[:, 3] <= 0).any():
        raise ValueError("box widths and heights must be positive")
    return arr


def check_points(points, name="points"):
    """Validate an (n, 2) array of 2-D points."""
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim == 1 and arr.shape[0] == 2:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must be (n, 2), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} must be finite")
    return arr


def check_frame(frame):
    """Validate an 8-bit image: (h, w) grayscale or (h, w, 3) color."""
    arr = np.asarray(frame)
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise ValueError(f"frame must be (h, w) or (h, w, 3), got {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("frame must be non-empty")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"frame dtype must be 8-bit integer, got {arr.dtype}")
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("frame samples must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def check_track_table(rows, name="tracks"):
    """Validate an (n, 9) MOT-style table: frame,id,x,y,w,h,conf,class,vis."""
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 9)
    if arr.ndim != 2 or arr.shape[1] != 9:
        raise ValueError(f"{name} must be (n, 9) MOT rows, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} entries must be finite")
    if (arr[:, 4] <= 0).any() or (arr[:, 5] <= 0).any():
        raise ValueError(f"{name} box widths and heights must be positive")
    return arr
