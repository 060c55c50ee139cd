"""Lossless 8-bit frame I/O: binary PPM (P6) and RGB PNG.

Intensities are stored internally as floats in [0, 1]; quantization to 8-bit
rounds half up (`floor(v * 255 + 0.5)`), so a save/load round trip of an
already-quantized frame is bit exact.
"""

from __future__ import annotations

import os
import re

import numpy as np

from .errors import FormatError, SequenceGapError, ShapeMismatchError
from .frames import Frame, FrameSequence

DEFAULT_PATTERN = "frame_%05d.ppm"


def quantize(frame: Frame) -> np.ndarray:
    """Map [0, 1] float intensities to uint8, rounding half up."""
    v = np.clip(frame.data, 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def _read_ppm(path: str) -> Frame:
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(b"P6"):
        raise FormatError(f"{path}: not a binary PPM (P6) file")

    # Header tokens may be separated by whitespace and '#' comments.
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated PPM header")
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace byte after maxval

    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"{path}: malformed PPM header") from None
    if maxval != 255:
        raise FormatError(f"{path}: unsupported PPM maxval {maxval} (expected 255)")

    need = width * height * 3
    pixels = raw[pos : pos + need]
    if len(pixels) != need:
        raise FormatError(f"{path}: expected {need} pixel bytes, found {len(pixels)}")
    data = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3)
    return Frame(data.astype(np.float64) / 255.0)


def _write_ppm(frame: Frame, path: str) -> None:
    data = quantize(frame)
    header = f"P6\n{frame.width} {frame.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def _read_png(path: str) -> Frame:
    from PIL import Image

    with Image.open(path) as img:
        if img.mode not in ("RGB", "L"):
            img = img.convert("RGB")
        arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim == 2:  # grayscale replicated to RGB
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    return Frame(arr.astype(np.float64) / 255.0)


def _write_png(frame: Frame, path: str) -> None:
    from PIL import Image

    Image.fromarray(quantize(frame), mode="RGB").save(path, format="PNG")


def load_frame(path: str) -> Frame:
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ppm":
        return _read_ppm(path)
    if ext == ".png":
        return _read_png(path)
    raise FormatError(f"{path}: unsupported image format '{ext}'")


def save_frame(frame: Frame, path: str, fmt: str | None = None) -> None:
    """Write a frame as binary PPM or 8-bit RGB PNG, inferring from the path."""
    if fmt is None:
        fmt = os.path.splitext(path)[1].lstrip(".").lower()
    if fmt == "ppm":
        _write_ppm(frame, path)
    elif fmt == "png":
        _write_png(frame, path)
    else:
        raise FormatError(f"unsupported output format '{fmt}'")


def _pattern_regex(pattern: str) -> re.Pattern:
    m = re.search(r"%(0?\d*)d", pattern)
    if m is None:
        raise FormatError(f"filename pattern {pattern!r} has no %d placeholder")
    prefix, suffix = pattern[: m.start()], pattern[m.end() :]
    return re.compile(re.escape(prefix) + r"(\d+)" + re.escape(suffix) + r"$")


def load_sequence(directory: str, pattern: str = DEFAULT_PATTERN) -> FrameSequence:
    """Load frames `pattern % 1 .. pattern % n` from a directory.

    Indices must be contiguous and start at 1; a missing index raises
    SequenceGapError naming it.
    """
    rx = _pattern_regex(pattern)
    indices = {}
    for name in os.listdir(directory):
        m = rx.match(name)
        if m:
            indices[int(m.group(1))] = name
    if not indices:
        raise FormatError(f"no files matching {pattern!r} in {directory}")
    n = max(indices)
    for i in range(1, n + 1):
        if i not in indices:
            raise SequenceGapError(f"missing frame index {i} (expected {pattern % i})")

    frames = []
    for i in range(1, n + 1):
        frame = load_frame(os.path.join(directory, indices[i]))
        if frames and frame.shape != frames[0].shape:
            raise ShapeMismatchError(
                f"{indices[i]} is {frame.width}x{frame.height}, expected "
                f"{frames[0].width}x{frames[0].height}"
            )
        frames.append(frame)
    return FrameSequence(frames)


def save_sequence(seq: FrameSequence, directory: str,
                  pattern: str = DEFAULT_PATTERN, fmt: str | None = None) -> None:
    os.makedirs(directory, exist_ok=True)
    for i in range(1, len(seq) + 1):
        save_frame(seq[i], os.path.join(directory, pattern % i), fmt)
