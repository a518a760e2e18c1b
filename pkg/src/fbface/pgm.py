"""Binary 8-bit PGM (P5) reading and writing."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _tokens(data: bytes):
    pos = 0
    n = len(data)
    while True:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace():
            pos += 1
        yield data[start:pos], pos


def read_pgm(path) -> np.ndarray:
    """Read a P5 file into a float array of 0..255 intensities."""
    data = Path(path).read_bytes()
    tokens = _tokens(data)
    try:
        magic, _ = next(tokens)
        width, _ = next(tokens)
        height, _ = next(tokens)
        maxval, end = next(tokens)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError) as exc:
        raise ValueError(f"{path}: malformed PGM header") from exc
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {magic!r})")
    if not 0 < maxval < 256:
        raise ValueError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")
    pixels = data[end + 1 : end + 1 + width * height]
    if len(pixels) != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).astype(float)


def write_pgm(path, image) -> None:
    arr = np.clip(np.rint(np.asarray(image, dtype=float)), 0, 255).astype(np.uint8)
    h, w = arr.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + arr.tobytes())
