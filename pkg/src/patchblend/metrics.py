"""Temporal-consistency measurement between adjacent frames.

Values are reported on the 8-bit scale (intensity * 255) so magnitudes are
comparable to commonly published numbers; the frames themselves stay in
normalized float.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .frames import FrameSequence


@dataclass
class ConsistencyReport:
    """Mean squared difference of each adjacent frame pair, 8-bit scale.

    `pair_values[k]` covers frames (k+1, k+2) in 1-based numbering.
    """

    pair_values: list
    mean: float
    min_pair: int
    max_pair: int

    def to_dict(self) -> dict:
        return {
            "pair_mse": self.pair_values,
            "mean_pixel_mse": self.mean,
            "min_pair": self.min_pair,
            "max_pair": self.max_pair,
        }


def pixel_mse(seq: FrameSequence) -> ConsistencyReport:
    if len(seq) < 2:
        raise ConfigError("consistency metric needs at least 2 frames")
    values = []
    for i in range(1, len(seq)):
        d = (seq[i].data - seq[i + 1].data) * 255.0
        values.append(float(np.mean(d * d)))
    arr = np.asarray(values)
    return ConsistencyReport(
        pair_values=values,
        mean=float(arr.mean()),
        min_pair=int(arr.argmin()) + 1,
        max_pair=int(arr.argmax()) + 1,
    )
