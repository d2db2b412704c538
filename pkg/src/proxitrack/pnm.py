"""Binary PGM (P5) and PPM (P6) image I/O, maxval 255.

The writer emits a canonical header (`P5\\n<w> <h>\\n255\\n`) so that a
read/write round trip is byte-identical.  The reader tolerates the
usual header freedoms: `#` comments and arbitrary whitespace between
tokens.
"""

import numpy as np

from .validation import check_frame


def _read_tokens(data, count):
    """Scan `count` whitespace-separated header tokens, skipping comments.

    Returns (tokens, offset_past_single_whitespace_after_last_token).
    """
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace() and data[i : i + 1] != b"#":
            i += 1
        if start == i:
            raise ValueError("truncated PNM header")
        tokens.append(data[start:i])
    if i >= n or not data[i : i + 1].isspace():
        raise ValueError("PNM header must end with a whitespace byte")
    return tokens, i + 1


def read_pnm(path):
    """Read a binary PGM/PPM file into a uint8 array (h, w) or (h, w, 3)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] not in (b"P5", b"P6"):
        raise ValueError(f"{path}: not a binary PGM/PPM file")
    channels = 1 if data[:2] == b"P5" else 3
    tokens, offset = _read_tokens(data[2:], 3)
    width, height, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported, got {maxval}")
    if width <= 0 or height <= 0:
        raise ValueError(f"{path}: invalid dimensions {width}x{height}")
    payload = data[2 + offset :]
    expected = width * height * channels
    if len(payload) < expected:
        raise ValueError(f"{path}: truncated pixel data ({len(payload)} < {expected})")
    pixels = np.frombuffer(payload[:expected], dtype=np.uint8)
    if channels == 1:
        return pixels.reshape(height, width).copy()
    return pixels.reshape(height, width, 3).copy()


def write_pnm(path, frame):
    """Write a uint8 array as binary PGM (grayscale) or PPM (color)."""
    arr = check_frame(frame)
    magic = b"P5" if arr.ndim == 2 else b"P6"
    height, width = arr.shape[:2]
    header = magic + b"\n%d %d\n255\n" % (width, height)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())
