"""Core raster types: frames, frame sequences and the blending accumulator.

Frames hold normalized float intensities.  Values are kept in [0, 1] at the
I/O boundaries (loading, saving, finalizing a blend); intermediate buffers
such as accumulator sums or decoded latent estimates may exceed that range
and are only clamped when a final frame is produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyAccumulatorError, ShapeMismatchError

CHANNELS = 3


@dataclass(frozen=True)
class Frame:
    """A single RGB image, stored as a (height, width, 3) float64 array.

    Frames are treated as immutable after construction; the array is not
    copied, so callers must not mutate it afterwards.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != CHANNELS:
            raise ShapeMismatchError(
                f"frame data must have shape (h, w, {CHANNELS}), got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("frame data contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    @classmethod
    def filled(cls, height: int, width: int, value: float = 0.0) -> "Frame":
        return cls(np.full((height, width, CHANNELS), value, dtype=np.float64))

    def clipped(self) -> "Frame":
        """Return a copy with all intensities clamped to [0, 1]."""
        return Frame(np.clip(self.data, 0.0, 1.0))


class FrameSequence:
    """An ordered, non-empty list of same-sized frames, indexed from 1.

    Indexing is 1-based throughout the public API so frame numbers line up
    with on-disk numbering and with the blend engine's column arithmetic.
    """

    def __init__(self, frames):
        frames = list(frames)
        if not frames:
            raise ValueError("frame sequence must not be empty")
        shape = frames[0].shape
        for k, f in enumerate(frames, start=1):
            if f.shape != shape:
                raise ShapeMismatchError(
                    f"frame {k} has size {f.shape[1]}x{f.shape[0]}, "
                    f"expected {shape[1]}x{shape[0]}"
                )
        self._frames = frames

    def __len__(self) -> int:
        return len(self._frames)

    def __iter__(self):
        return iter(self._frames)

    def __getitem__(self, index: int) -> Frame:
        if not 1 <= index <= len(self._frames):
            raise IndexError(f"frame index {index} out of range 1..{len(self._frames)}")
        return self._frames[index - 1]

    @property
    def height(self) -> int:
        return self._frames[0].height

    @property
    def width(self) -> int:
        return self._frames[0].width

    def reversed(self) -> "FrameSequence":
        return FrameSequence(list(reversed(self._frames)))


@dataclass
class PixelAccumulator:
    """Un-normalized pixelwise sum plus the number of frames it covers.

    This is the payload of the blending operator: sums are added elementwise
    and the count records how many frames contributed, so that the final
    average divides once at the end instead of renormalizing at every merge.
    """

    sum: np.ndarray
    count: int = 0

    def __post_init__(self):
        self.sum = np.ascontiguousarray(self.sum, dtype=np.float64)
        if self.sum.ndim != 3 or self.sum.shape[2] != CHANNELS:
            raise ShapeMismatchError(f"accumulator must be (h, w, {CHANNELS})")
        if self.count < 0:
            raise ValueError("accumulator count must be non-negative")

    @classmethod
    def empty(cls, height: int, width: int) -> "PixelAccumulator":
        return cls(np.zeros((height, width, CHANNELS), dtype=np.float64), 0)

    @classmethod
    def of(cls, frame: Frame) -> "PixelAccumulator":
        return cls(frame.data.copy(), 1)

    @property
    def shape(self) -> tuple[int, int]:
        return self.sum.shape[0], self.sum.shape[1]

    def copy(self) -> "PixelAccumulator":
        return PixelAccumulator(self.sum.copy(), self.count)


def accumulate(acc: PixelAccumulator, other) -> PixelAccumulator:
    """Merge a frame or another accumulator into `acc`, returning a new one.

    A frame contributes its pixels with count 1; accumulators add both their
    sums and their counts.
    """
    if isinstance(other, Frame):
        other = PixelAccumulator.of(other)
    if acc.shape != other.shape:
        raise ShapeMismatchError(
            f"accumulator shapes differ: {acc.shape} vs {other.shape}"
        )
    return PixelAccumulator(acc.sum + other.sum, acc.count + other.count)


def finalize(acc: PixelAccumulator) -> Frame:
    """Divide the accumulated sum by its count, clamping to [0, 1]."""
    if acc.count < 1:
        raise EmptyAccumulatorError("cannot finalize an accumulator with count 0")
    return Frame(np.clip(acc.sum / acc.count, 0.0, 1.0))
